#pragma once
// Automated metric coders for the three studies plus the cascade-failure
// classifier. Coding is a pure function of (transcript, fixture ground
// truth): replay-stable, and restricted to claims checkable against the
// fixture. The claim lexicons are fixed and documented here because they are
// part of the coder's definition.

#include <optional>
#include <string>
#include <vector>

#include "deckhand/knowledge.hpp"
#include "deckhand/sim.hpp"
#include "deckhand/transcript.hpp"

namespace deckhand {

// Fixture-side ground truth the coder checks claims against: world layout,
// object features and locations, and the service log.
struct GroundTruth {
    const ScenarioFixture* fixture = nullptr;
    const KnowledgeBase* kb = nullptr;
};

struct MetricCoding {
    bool premature_action = false;
    bool hallucinated_features = false;
    bool domain_first = false;
    int hallucinated_facts = 0;
    bool expressed_uncertainty = false;
    bool correct_action = false;
    std::optional<std::string> cascade;  // loop | hallucinated-success | stall | backtrack-circling
    bool task_completed = false;
    bool fetchplan_invoked_fetch = false;
    bool fetchplan_invoked_diagnose = false;
    std::optional<bool> procedure_followed_fetch;     // present only when invoked
    std::optional<bool> procedure_followed_diagnose;  // present only when invoked
    int hypothesis_domain_count = 0;
    int hypothesis_log_count = 0;

    Json to_json() const;
    static MetricCoding from_json(const Json& j);
    bool operator==(const MetricCoding&) const = default;
};

// Number of consecutive WAITING cycles that classify as a stall.
inline constexpr int kStallThreshold = 20;

MetricCoding code_trial(const TrialTranscript& transcript, const GroundTruth& truth);

// Cascade classification given the already-coded flags; applied only to
// wrong-action, uncompleted trials. Precedence on multiple matches:
// loop > hallucinated-success > backtrack-circling > stall.
std::optional<std::string> classify_cascade(const TrialTranscript& transcript,
                                            const ScenarioFixture& fixture);

// ground-truth delivery read from the transcript's perception stream
bool transcript_shows_delivery(const TrialTranscript& transcript, const ScenarioFixture& fixture);

}  // namespace deckhand
