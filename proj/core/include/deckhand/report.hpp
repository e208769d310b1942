#pragma once
// Aggregation of per-trial codings into the summary table (reference /
// internal-knowledge / knowledge-equalized columns with Fisher or
// Mann-Whitney p-values and Cohen's h), plus per-model breakdowns and the
// cascade taxonomy shares. Emits a plain-text table and a machine-readable
// JSON document with every number.

#include <string>
#include <vector>

#include "deckhand/coding.hpp"
#include "deckhand/stats.hpp"

namespace deckhand {

struct TrialCoding {
    std::string agent;      // ontoagent | llm
    std::string model;      // empty for ontoagent
    std::string condition;  // ik | ke, empty for ontoagent
    MetricCoding coding;
};

struct Report {
    std::string text;
    Json machine;
};

Report aggregate_report(const std::vector<TrialCoding>& codings);

}  // namespace deckhand
