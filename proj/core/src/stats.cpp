#include "deckhand/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace deckhand::stats {

namespace {

double log_choose(int64_t n, int64_t k) {
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    return std::lgamma(static_cast<double>(n + 1)) - std::lgamma(static_cast<double>(k + 1)) -
           std::lgamma(static_cast<double>(n - k + 1));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

double fisher_exact(const ContingencyTable& t) {
    if (t.a < 0 || t.b < 0 || t.c < 0 || t.d < 0) throw StatsError("negative cell count");
    const int64_t r1 = t.a + t.b;
    const int64_t r2 = t.c + t.d;
    const int64_t c1 = t.a + t.c;
    const int64_t n = r1 + r2;
    if (n == 0) return 1.0;

    const double log_denominator = log_choose(n, c1);
    auto log_p_of = [&](int64_t a) {
        return log_choose(r1, a) + log_choose(r2, c1 - a) - log_denominator;
    };

    const double log_p_observed = log_p_of(t.a);
    const int64_t a_min = std::max<int64_t>(0, c1 - r2);
    const int64_t a_max = std::min(r1, c1);

    // relative slack admits floating-point ties with the observed probability
    const double cutoff = log_p_observed + 1e-7;
    double p = 0.0;
    for (int64_t a = a_min; a <= a_max; ++a) {
        double lp = log_p_of(a);
        if (lp <= cutoff) p += std::exp(lp);
    }
    return std::min(p, 1.0);
}

MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw StatsError("empty sample");
    const size_t n1 = a.size();
    const size_t n2 = b.size();
    const size_t n = n1 + n2;

    std::vector<double> pooled;
    pooled.reserve(n);
    pooled.insert(pooled.end(), a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());

    // midranks over the pooled sample
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t i, size_t j) { return pooled[i] < pooled[j]; });
    std::vector<double> ranks(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        double midrank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = midrank;
        i = j + 1;
    }

    auto u_for_subset = [&](const std::vector<size_t>& subset) {
        double rank_sum = 0;
        for (size_t idx : subset) rank_sum += ranks[idx];
        return rank_sum - static_cast<double>(subset.size()) *
                              (static_cast<double>(subset.size()) + 1.0) / 2.0;
    };

    std::vector<size_t> sample_a(n1);
    std::iota(sample_a.begin(), sample_a.end(), 0);
    const double u_observed = u_for_subset(sample_a);
    const double mu = static_cast<double>(n1) * static_cast<double>(n2) / 2.0;

    MannWhitneyResult res;
    res.u = u_observed;

    if (n <= 12) {
        // exact: enumerate every assignment of n1 labels to the pooled ranks
        res.exact = true;
        const double dev_observed = std::abs(u_observed - mu);
        int64_t total = 0, extreme = 0;
        std::vector<size_t> subset;
        subset.reserve(n1);
        auto recurse = [&](auto&& self, size_t next, size_t chosen) -> void {
            if (chosen == n1) {
                ++total;
                if (std::abs(u_for_subset(subset) - mu) >= dev_observed - 1e-12) ++extreme;
                return;
            }
            if (n - next < n1 - chosen) return;
            subset.push_back(next);
            self(self, next + 1, chosen + 1);
            subset.pop_back();
            self(self, next + 1, chosen);
        };
        recurse(recurse, 0, 0);
        res.p = static_cast<double>(extreme) / static_cast<double>(total);
        return res;
    }

    // normal approximation with tie correction and continuity correction
    double tie_term = 0;
    i = 0;
    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
        double tcount = static_cast<double>(j - i + 1);
        tie_term += tcount * tcount * tcount - tcount;
        i = j + 1;
    }
    double n_d = static_cast<double>(n);
    double variance = (static_cast<double>(n1) * static_cast<double>(n2) / 12.0) *
                      ((n_d + 1.0) - tie_term / (n_d * (n_d - 1.0)));
    if (variance <= 0) {
        res.p = 1.0;  // all values tied
        return res;
    }
    double z = (std::abs(u_observed - mu) - 0.5) / std::sqrt(variance);
    if (z < 0) z = 0;
    res.p = std::min(1.0, 2.0 * (1.0 - normal_cdf(z)));
    return res;
}

double cohens_h(double p1, double p2) {
    if (p1 < 0.0 || p1 > 1.0 || p2 < 0.0 || p2 > 1.0)
        throw StatsError("proportions must lie in [0,1]");
    return 2.0 * std::asin(std::sqrt(p2)) - 2.0 * std::asin(std::sqrt(p1));
}

}  // namespace deckhand::stats
