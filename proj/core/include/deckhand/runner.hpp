#pragma once
// Trial runner: the fixed interleaving loop (Daniel's scripted turn,
// perception encode, strategic step, command decode, tactical tick, world
// step), transcript emission, and batch execution. Daniel is a scripted
// dialogue process; in interactive sessions a callback replaces the script.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "deckhand/agent.hpp"
#include "deckhand/llm.hpp"
#include "deckhand/sim.hpp"
#include "deckhand/transcript.hpp"

namespace deckhand {

struct RunConfig {
    std::string agent = "ontoagent";  // ontoagent | llm
    std::string model;
    Condition condition = Condition::IK;
    std::string backend = "live";  // live | replay
    int trials = 1;
    uint64_t seed = 0;
    std::string out_dir;       // when set, transcripts stream to trial-XXX.jsonl
    int tick_budget = 0;       // 0: fixture default
    int latency_ticks = -1;    // -1: 0 for ontoagent, 1 for llm
    std::vector<std::string> recordings;  // replay: one transcript per trial

    // fixture-authoring hook: per-trial deterministic policies stand in for a
    // live provider
    std::function<ScriptedPolicy(int trial_index)> scripted_factory;

    // interactive Daniel: asked once per tick; nullopt = silence. Returning
    // the sentinel "\x04" closes the input; the trial then runs on (with a
    // silent Daniel) until it completes, quiesces, or exhausts the budget.
    std::function<std::optional<std::string>(int tick)> interactive_daniel;

    // observers for interactive rendering
    std::function<void(const World&, int tick)> on_tick;
    std::function<void(const TranscriptEvent&)> on_event;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void validate_config(const RunConfig& config);

struct TrialResult {
    TrialTranscript transcript;
    bool delivered = false;
    int end_tick = 0;
    std::string end_reason;  // completed | budget | quiescent | aborted | input-closed
};

TrialResult run_trial(const RunConfig& config, const ScenarioFixture& fixture,
                      const KnowledgeBase& kb, int trial_index);

std::vector<TrialResult> run_trials(const RunConfig& config, const ScenarioFixture& fixture,
                                    const KnowledgeBase& kb);

}  // namespace deckhand
