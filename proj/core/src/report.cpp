#include "deckhand/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace deckhand {

namespace {

std::string pct(int yes, int n) {
    if (n == 0) return "-";
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.0f%%", 100.0 * yes / n + 1e-9);
    return buf;
}

std::string fixed1(double v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

std::string p_value_text(double p) {
    if (p < 0.001) return "<.001";
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.3f", p);
    std::string s = buf;
    if (s.rfind("0.", 0) == 0) s = s.substr(1);
    return s;
}

struct BinaryMetric {
    std::string name;
    std::function<bool(const MetricCoding&)> value;
};

}  // namespace

Report aggregate_report(const std::vector<TrialCoding>& codings) {
    std::vector<const MetricCoding*> ref, ik, ke;
    std::set<std::string> models;
    for (const auto& t : codings) {
        if (t.agent == "ontoagent") {
            ref.push_back(&t.coding);
        } else if (t.condition == "ik") {
            ik.push_back(&t.coding);
            models.insert(t.model);
        } else if (t.condition == "ke") {
            ke.push_back(&t.coding);
            models.insert(t.model);
        }
    }

    std::vector<std::string> notes;
    if (!ik.empty() && !ke.empty() && ik.size() != ke.size())
        notes.push_back("condition group sizes differ (ik=" + std::to_string(ik.size()) +
                        ", ke=" + std::to_string(ke.size()) + ")");
    bool small_n = (ik.size() < 2 || ke.size() < 2);
    if (small_n) notes.push_back("group too small for a test statistic; p omitted");

    const std::vector<std::pair<std::string, std::vector<BinaryMetric>>> studies = {
        {"Study 1: Metacognitive monitoring",
         {{"Premature action", [](const MetricCoding& c) { return c.premature_action; }},
          {"Hallucinated features",
           [](const MetricCoding& c) { return c.hallucinated_features; }}}},
        {"Study 2: Diagnostic reasoning",
         {{"Domain-first diagnosis", [](const MetricCoding& c) { return c.domain_first; }},
          {"Expressed uncertainty",
           [](const MetricCoding& c) { return c.expressed_uncertainty; }}}},
        {"Study 3: Action consequence",
         {{"Correct action (SEARCH)", [](const MetricCoding& c) { return c.correct_action; }},
          {"Cascade failure", [](const MetricCoding& c) { return c.cascade.has_value(); }}}},
    };

    std::ostringstream text;
    Json machine;
    machine["groups"] = Json{{"ref", ref.size()}, {"ik", ik.size()}, {"ke", ke.size()}};
    Json metrics = Json::object();

    auto count_yes = [](const std::vector<const MetricCoding*>& g,
                        const std::function<bool(const MetricCoding&)>& f) {
        int yes = 0;
        for (const auto* c : g)
            if (f(*c)) ++yes;
        return yes;
    };

    text << "Metric                          Ref. OA       IK       KE        p\n";
    text << "-------------------------------------------------------------------\n";
    for (const auto& [study, metric_list] : studies) {
        text << study << "\n";
        for (const auto& m : metric_list) {
            int ry = count_yes(ref, m.value);
            int iy = count_yes(ik, m.value);
            int ky = count_yes(ke, m.value);
            std::string p_text = "-";
            Json entry;
            entry["ref"] = Json{{"yes", ry}, {"n", ref.size()}};
            entry["ik"] = Json{{"yes", iy}, {"n", ik.size()}};
            entry["ke"] = Json{{"yes", ky}, {"n", ke.size()}};
            if (!small_n && !ik.empty() && !ke.empty()) {
                double p = stats::fisher_exact(
                    {iy, static_cast<int64_t>(ik.size()) - iy, ky,
                     static_cast<int64_t>(ke.size()) - ky});
                entry["p"] = p;
                entry["test"] = "fisher";
                p_text = p_value_text(p);
                if (p < 0.05) {
                    double h = stats::cohens_h(static_cast<double>(iy) / ik.size(),
                                               static_cast<double>(ky) / ke.size());
                    entry["cohens_h"] = h;
                    char buf[24];
                    std::snprintf(buf, sizeof(buf), " |h|=%.2f", std::fabs(h));
                    p_text += buf;
                }
            }
            char line[160];
            std::snprintf(line, sizeof(line), "  %-28s %7s %8s %8s   %s\n", m.name.c_str(),
                          pct(ry, static_cast<int>(ref.size())).c_str(),
                          pct(iy, static_cast<int>(ik.size())).c_str(),
                          pct(ky, static_cast<int>(ke.size())).c_str(), p_text.c_str());
            text << line;
            metrics[m.name] = entry;
        }
        if (study.rfind("Study 2", 0) == 0) {
            // the continuous metric sits inside study 2
            auto mean_of = [](const std::vector<const MetricCoding*>& g) {
                if (g.empty()) return 0.0;
                double sum = 0;
                for (const auto* c : g) sum += c->hallucinated_facts;
                return sum / static_cast<double>(g.size());
            };
            std::string p_text = "-";
            Json entry;
            entry["ref_mean"] = mean_of(ref);
            entry["ik_mean"] = mean_of(ik);
            entry["ke_mean"] = mean_of(ke);
            if (!small_n && !ik.empty() && !ke.empty()) {
                std::vector<double> a, b;
                for (const auto* c : ik) a.push_back(c->hallucinated_facts);
                for (const auto* c : ke) b.push_back(c->hallucinated_facts);
                auto res = stats::mann_whitney_u(a, b);
                entry["p"] = res.p;
                entry["u"] = res.u;
                entry["test"] = "mann-whitney";
                p_text = p_value_text(res.p) + " (MWU)";
            }
            char line[160];
            std::snprintf(line, sizeof(line), "  %-28s %7s %8s %8s   %s\n",
                          "Hallucinated facts (mean)", fixed1(entry["ref_mean"].get<double>()).c_str(),
                          fixed1(entry["ik_mean"].get<double>()).c_str(),
                          fixed1(entry["ke_mean"].get<double>()).c_str(), p_text.c_str());
            text << line;
            metrics["Hallucinated facts (mean)"] = entry;
        }
    }
    {
        BinaryMetric m{"Task completed", [](const MetricCoding& c) { return c.task_completed; }};
        int ry = count_yes(ref, m.value);
        int iy = count_yes(ik, m.value);
        int ky = count_yes(ke, m.value);
        std::string p_text = "-";
        Json entry;
        entry["ref"] = Json{{"yes", ry}, {"n", ref.size()}};
        entry["ik"] = Json{{"yes", iy}, {"n", ik.size()}};
        entry["ke"] = Json{{"yes", ky}, {"n", ke.size()}};
        if (!small_n && !ik.empty() && !ke.empty()) {
            double p = stats::fisher_exact({iy, static_cast<int64_t>(ik.size()) - iy, ky,
                                            static_cast<int64_t>(ke.size()) - ky});
            entry["p"] = p;
            entry["test"] = "fisher";
            p_text = p_value_text(p);
            if (p < 0.05) {
                double h = stats::cohens_h(static_cast<double>(iy) / ik.size(),
                                           static_cast<double>(ky) / ke.size());
                entry["cohens_h"] = h;
                char buf[24];
                std::snprintf(buf, sizeof(buf), " |h|=%.2f", std::fabs(h));
                p_text += buf;
            }
        }
        text << "-------------------------------------------------------------------\n";
        char line[160];
        std::snprintf(line, sizeof(line), "  %-28s %7s %8s %8s   %s\n", m.name.c_str(),
                      pct(ry, static_cast<int>(ref.size())).c_str(),
                      pct(iy, static_cast<int>(ik.size())).c_str(),
                      pct(ky, static_cast<int>(ke.size())).c_str(), p_text.c_str());
        text << line;
        metrics["Task completed"] = entry;
    }
    machine["metrics"] = metrics;

    // per-model breakdowns
    text << "\nPer-model breakdown\n";
    Json per_model = Json::object();
    for (const auto& model : models) {
        Json row = Json::object();
        for (const std::string cond : {"ik", "ke"}) {
            int n = 0, premature = 0, correct = 0, completed = 0;
            double domain_hyp = 0, log_hyp = 0;
            int invoked_fetch = 0, followed_fetch = 0, invoked_diag = 0, followed_diag = 0;
            for (const auto& t : codings) {
                if (t.model != model || t.condition != cond) continue;
                ++n;
                premature += t.coding.premature_action;
                correct += t.coding.correct_action;
                completed += t.coding.task_completed;
                domain_hyp += t.coding.hypothesis_domain_count;
                log_hyp += t.coding.hypothesis_log_count;
                invoked_fetch += t.coding.fetchplan_invoked_fetch;
                followed_fetch += t.coding.procedure_followed_fetch.value_or(false);
                invoked_diag += t.coding.fetchplan_invoked_diagnose;
                followed_diag += t.coding.procedure_followed_diagnose.value_or(false);
            }
            if (n == 0) continue;
            Json cj;
            cj["n"] = n;
            cj["premature_rate"] = static_cast<double>(premature) / n;
            cj["correct_action_rate"] = static_cast<double>(correct) / n;
            cj["completed_rate"] = static_cast<double>(completed) / n;
            cj["mean_domain_hypotheses"] = domain_hyp / n;
            cj["mean_log_hypotheses"] = log_hyp / n;
            if (cond == "ke") {
                cj["fetchplan"] = Json{
                    {"fetch", Json{{"invoked", invoked_fetch}, {"followed", followed_fetch}}},
                    {"diagnose",
                     Json{{"invoked", invoked_diag}, {"followed", followed_diag}}}};
            }
            row[cond] = cj;
            char line[200];
            std::snprintf(line, sizeof(line),
                          "  %-12s %-3s n=%d premature=%s correct=%s completed=%s "
                          "hyp(domain/log)=%.1f/%.1f\n",
                          model.c_str(), cond.c_str(), n, pct(premature, n).c_str(),
                          pct(correct, n).c_str(), pct(completed, n).c_str(), domain_hyp / n,
                          log_hyp / n);
            text << line;
            if (cond == "ke") {
                std::snprintf(line, sizeof(line),
                              "  %-12s %-3s retrieval gap: fetch %d/%d invoked/followed, "
                              "diagnose %d/%d\n",
                              model.c_str(), cond.c_str(), invoked_fetch, followed_fetch,
                              invoked_diag, followed_diag);
                text << line;
            }
        }
        per_model[model] = row;
    }
    machine["per_model"] = per_model;

    // cascade taxonomy over wrong-action trials
    std::map<std::string, int> taxonomy;
    int wrong_action = 0;
    for (const auto& t : codings) {
        if (t.agent != "llm" || t.coding.correct_action) continue;
        ++wrong_action;
        if (t.coding.cascade) taxonomy[*t.coding.cascade] += 1;
    }
    text << "\nCascade taxonomy (wrong-action trials: " << wrong_action << ")\n";
    Json cascade_json = Json::object();
    for (const std::string label :
         {"loop", "hallucinated-success", "stall", "backtrack-circling"}) {
        int n = taxonomy.count(label) ? taxonomy[label] : 0;
        cascade_json[label] = n;
        char line[96];
        std::snprintf(line, sizeof(line), "  %-22s %3d  %s\n", label.c_str(), n,
                      wrong_action ? pct(n, wrong_action).c_str() : "-");
        text << line;
    }
    machine["cascade_taxonomy"] = cascade_json;
    machine["wrong_action_trials"] = wrong_action;

    for (const auto& n : notes) text << "\nnote: " << n << "\n";
    Json njson = Json::array();
    for (const auto& n : notes) njson.push_back(n);
    machine["notes"] = njson;

    return Report{text.str(), machine};
}

}  // namespace deckhand
