#pragma once
// The reference strategic layer. Serially event-driven: dialogue turns,
// candidate VMRs, command outcomes, and clock ticks come in; commands, GMR
// utterances, tool records, and reasoning-trace records come out. Identical
// state and event produce identical outputs, and every output is preceded by
// a reasoning record citing the script, cause link, or requirement behind it.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "deckhand/commands.hpp"
#include "deckhand/knowledge.hpp"
#include "deckhand/sim.hpp"
#include "deckhand/tactical.hpp"
#include "deckhand/templates.hpp"

namespace deckhand {

// ------------------------------------------------------------- situation

class SituationModel {
public:
    // Adds a frame under a fresh situation-scoped index for its concept.
    FrameInstance& add(std::string concept_name, int tick);
    FrameInstance* find(const InstanceId& id);
    const FrameInstance* find(const InstanceId& id) const;
    std::vector<int> instances_of(std::string_view concept_name) const;
    const std::vector<FrameInstance>& frames() const { return frames_; }
    int last_update_tick() const { return last_update_; }
    void touch(int tick) { last_update_ = tick; }

private:
    std::vector<FrameInstance> frames_;
    int last_update_ = 0;
};

// ---------------------------------------------------------------- agenda

enum class PlanStatus { Pending, Active, Blocked, Done, Failed };

std::string_view plan_status_name(PlanStatus s);

struct PlanInstance {
    std::string script_id;
    Json bindings = Json::object();  // variable -> value
    size_t cursor = 0;
    std::vector<KnowledgeRequirement> missing;
};

struct AgendaEntry {
    FrameInstance goal;  // concept = goal concept; slots: theme ref, requester
    PlanInstance plan;
    PlanStatus status = PlanStatus::Pending;
    bool announce_completion = false;
};

// ----------------------------------------------------------------- events

struct DialogueHeard {
    std::string speaker;
    std::string text;
};
struct VmrCandidate {
    int action_id = 0;
    std::string vmr_text;
};
struct CommandOutcome {
    int action_id = 0;
    std::string command;
    SkillState state = SkillState::Succeeded;
    Json detail = Json::object();
};
struct ClockTick {};

using AgentEvent = std::variant<DialogueHeard, VmrCandidate, CommandOutcome, ClockTick>;

struct AgentOutput {
    struct Say {
        std::string text;
        std::string gmr;  // rendered GMR document
    };
    std::vector<Say> utterances;
    std::vector<Command> commands;
    std::vector<Json> tool_records;      // {tool, query, result}
    std::vector<Json> reasoning;         // {rule, refs, note}
};

// ------------------------------------------------------------- grounding

struct GroundResult {
    bool match = false;
    std::vector<std::string> mismatches;
};

// Grounds a candidate VMR against expected features: string-valued features
// must match exactly, "age" may be an interval {"min","max"}. An empty
// expectation matches vacuously; a malformed VMR throws ParseError upstream.
GroundResult ground_vmr(const FrameDocument& vmr, const Json& expected);

// Builds the diagnosis GMR for a symptom: k cause hypotheses under uniform
// epistemic modality 1/k, wrapped in ALTERNATIVE when k >= 2.
FrameDocument build_diagnosis_gmr(const std::vector<const CauseLink*>& causes);

// ------------------------------------------------------------------ agent

class OntoAgent {
public:
    OntoAgent(const KnowledgeBase* kb, const ScenarioFixture* fixture);

    AgentOutput step(const AgentEvent& event, int tick);

    // The runner reports the tactical action id assigned to each command it
    // decoded, in emission order.
    void note_dispatch(int action_id);

    void observe_frame(const PerceptionFrame& frame);

    const SituationModel& situation() const { return situation_; }
    SituationModel& situation() { return situation_; }
    const std::vector<AgendaEntry>& agenda() const { return agenda_; }
    EpisodicStore& episodic() { return episodic_; }
    const TemplateEngine& templates() const { return templates_; }
    bool idle() const;  // no active/pending work and nothing in flight

private:
    struct Pending {  // command awaiting its tactical outcome
        int action_id = 0;
        size_t entry_index = 0;
        size_t step_index = 0;
        std::string command;
    };

    void ingest_tmr(const FrameDocument& tmr, int tick, AgentOutput& out);
    InstanceId ingest_theme(const FrameDocument& doc, const Filler& theme, int tick);
    void post_goal(const std::string& goal_concept, const InstanceId& theme,
                   std::optional<InstanceId> requester, int tick, AgentOutput& out);
    void refine_features(const FrameDocument& tmr, int tick, AgentOutput& out);
    void run_agenda(int tick, AgentOutput& out);
    bool verify_preconditions(AgendaEntry& entry, int tick, AgentOutput& out);
    void activate_metascript(AgendaEntry& entry, const KnowledgeRequirement& req, int tick,
                             AgentOutput& out);
    void execute_active(AgendaEntry& entry, size_t entry_index, int tick, AgentOutput& out);
    std::optional<Command> select_action(AgendaEntry& entry, const Step& step, int tick,
                                         AgentOutput& out);
    void run_find_causes(AgendaEntry& entry, int tick, AgentOutput& out);
    void run_searchlogs(AgendaEntry& entry, int tick, AgentOutput& out);
    void say_gmr(const FrameDocument& gmr, std::string rule, std::vector<std::string> refs,
                 int tick, AgentOutput& out);
    void report_inability(const std::string& reason, std::vector<std::string> refs, int tick,
                          AgentOutput& out);
    void reason(AgentOutput& out, std::string rule, std::vector<std::string> refs,
                std::string note);
    CorefScope scope();

    const KnowledgeBase* kb_;
    const ScenarioFixture* fixture_;
    TemplateEngine templates_;
    SituationModel situation_;
    EpisodicStore episodic_;
    std::vector<AgendaEntry> agenda_;
    std::optional<Pending> inflight_;
    std::vector<Pending> dispatch_queue_;  // emitted commands awaiting ids
    std::map<std::pair<size_t, std::string>, int> questions_asked_;  // (entry, subject) -> count
    std::vector<FrameInstance> last_hypotheses_;
    std::vector<std::string> last_hypothesis_refs_;
    FrameDocument pending_report_;  // GMR staged by a tool step for the report step
    std::optional<PerceptionFrame> last_frame_;
};

}  // namespace deckhand
