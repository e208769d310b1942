#pragma once
// Nonparametric statistics for the evaluation harness: two-sided Fisher's
// exact test, Mann-Whitney U with midrank ties (exact by enumeration for
// small samples, normal approximation with tie correction otherwise), and
// Cohen's h for proportion pairs.

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace deckhand::stats {

struct ContingencyTable {
    // rows are conditions, columns outcome yes/no
    int64_t a = 0, b = 0;  // condition 1: yes, no
    int64_t c = 0, d = 0;  // condition 2: yes, no
};

struct StatsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exact two-sided p: the sum of hypergeometric probabilities of all tables
// with the observed margins whose probability does not exceed the observed
// table's (with a small relative slack for floating-point ties).
double fisher_exact(const ContingencyTable& table);

struct MannWhitneyResult {
    double u = 0;        // U statistic for sample a, midrank ties
    double p = 0;        // two-sided
    bool exact = false;  // enumeration (n1+n2 <= 12) vs normal approximation
};

MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b);

// h = 2*asin(sqrt(p2)) - 2*asin(sqrt(p1)); throws on out-of-range proportions
double cohens_h(double p1, double p2);

}  // namespace deckhand::stats
