#pragma once
// Behavior-tree tactical controller with blackboard and translation layer.
// The controller runs every control cycle (2 Hz simulated), decoding strategic
// commands into skill configurations, ticking the active skill, and encoding
// perception frames upstream. It never blocks on strategic-layer latency.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "deckhand/commands.hpp"
#include "deckhand/sim.hpp"

namespace deckhand {

// ---------------------------------------------------------------- blackboard

// Tick-stamped keyed store. Perception keys are written only by the encoder,
// command keys only by the decoder, outcome keys only by skills; violations
// throw.
class Blackboard {
public:
    enum class Role { Encoder, Decoder, Skill };

    struct Entry {
        Json value;
        int tick = 0;
    };

    void set(const std::string& key, Json value, int tick, Role writer);
    const Entry* get(const std::string& key) const;
    const std::map<std::string, Entry>& entries() const { return entries_; }

private:
    std::map<std::string, Entry> entries_;
};

struct WriteDisciplineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ------------------------------------------------------------- behavior tree

enum class BtStatus { Success, Failure, Running };

struct BtContext {
    int tick = 0;
};

class BehaviorNode {
public:
    virtual ~BehaviorNode() = default;
    virtual BtStatus tick(BtContext& ctx) = 0;
    virtual std::string_view name() const = 0;
};

using BtNodePtr = std::unique_ptr<BehaviorNode>;

class Sequence : public BehaviorNode {
public:
    Sequence(std::string name, std::vector<BtNodePtr> children);
    BtStatus tick(BtContext& ctx) override;
    std::string_view name() const override { return name_; }

private:
    std::string name_;
    std::vector<BtNodePtr> children_;
};

class Selector : public BehaviorNode {
public:
    Selector(std::string name, std::vector<BtNodePtr> children);
    BtStatus tick(BtContext& ctx) override;
    std::string_view name() const override { return name_; }

private:
    std::string name_;
    std::vector<BtNodePtr> children_;
};

class ConditionNode : public BehaviorNode {
public:
    ConditionNode(std::string name, std::function<bool(BtContext&)> predicate);
    BtStatus tick(BtContext& ctx) override;
    std::string_view name() const override { return name_; }

private:
    std::string name_;
    std::function<bool(BtContext&)> predicate_;
};

class ActionNode : public BehaviorNode {
public:
    ActionNode(std::string name, std::function<BtStatus(BtContext&)> fn);
    BtStatus tick(BtContext& ctx) override;
    std::string_view name() const override { return name_; }

private:
    std::string name_;
    std::function<BtStatus(BtContext&)> fn_;
};

class Inverter : public BehaviorNode {
public:
    explicit Inverter(BtNodePtr child);
    BtStatus tick(BtContext& ctx) override;
    std::string_view name() const override { return "inverter"; }

private:
    BtNodePtr child_;
};

// Retries a failing child up to `attempts` times within a single tick.
class Retry : public BehaviorNode {
public:
    Retry(int attempts, BtNodePtr child);
    BtStatus tick(BtContext& ctx) override;
    std::string_view name() const override { return "retry"; }

private:
    int attempts_;
    BtNodePtr child_;
};

// ----------------------------------------------------------------- percepts

struct Detection {
    std::string id;
    std::string shape_class;
    std::optional<std::string> label;  // readable only within label range
    Json features = Json::object();
    double distance = 0;
    Vec2 relative;
    bool operator==(const Detection&) const = default;
};

struct PerceptionFrame {
    int tick = 0;
    Vec2 pose;
    double heading = 0;
    double speed = 0;
    std::vector<Detection> detections;
    bool collision = false;
    std::optional<std::string> gripper;

    Json to_json() const;
    static PerceptionFrame from_json(const Json& j);
};

// Deterministic projection of world state through the sensor model:
// range-limited omnidirectional detection, labels and features readable only
// within label range.
PerceptionFrame encode_frame(const World& world, int tick);

// Render a candidate detection as a vision meaning representation.
FrameDocument detection_to_vmr(const Detection& det, int tick);

// ---------------------------------------------------------------- controller

enum class SkillState { Idle, Running, Succeeded, Failed, Preempted };

std::string_view skill_state_name(SkillState s);

struct SkillEvent {
    int action_id = 0;
    std::string command;
    SkillState state = SkillState::Idle;  // terminal states only, or Running for candidates
    bool candidate = false;               // candidate stop carrying a VMR payload
    Json detail = Json::object();
};

struct DecodeResult {
    int action_id = 0;
    std::string error;                    // schema violations, unknown command
    std::vector<SkillEvent> events;       // outcomes for preempted/completed commands
};

struct TickOutput {
    Actuation actuation;
    std::vector<SkillEvent> events;
    std::string active_skill;  // "idle" when none
};

class TacticalController {
public:
    explicit TacticalController(const ScenarioFixture* fixture);

    // Decode one strategic command onto the blackboard. Atomically preempts
    // the running skill first; a SEARCH arriving while a search is paused at
    // a candidate resumes the sweep instead of restarting it, and a PICKUP
    // naming the paused candidate completes the search successfully.
    // `action_id` is the caller-allocated id pairing the action with its
    // eventual outcome; 0 lets the controller allocate one.
    DecodeResult decode_command(const Command& cmd, int tick, int action_id = 0);

    // One control cycle: safety conditions, then the active skill.
    TickOutput tick(const PerceptionFrame& frame, int tick);

    Blackboard& blackboard() { return blackboard_; }
    const Blackboard& blackboard() const { return blackboard_; }
    bool has_active_command() const { return active_action_id_ != 0; }
    int active_action_id() const { return active_action_id_; }

private:
    struct SearchStateMachine {
        std::string zone;
        std::string object_type;
        Json expected_features = Json::object();
        std::set<std::string> exclude;
        size_t sweep_index = 0;
        bool to_path_start = true;
        std::optional<std::string> approaching;  // object id
        std::optional<std::string> paused_candidate;
    };
    struct WaypointStateMachine {
        Vec2 target;
        double tolerance = 0;
    };
    struct ManipStateMachine {
        std::string object;  // pickup target
        std::string place;   // drop place
        bool requested = false;
    };

    SkillEvent make_event(SkillState state, Json detail) const;
    BtStatus run_active_skill(BtContext& ctx);
    BtStatus tick_search(BtContext& ctx);
    BtStatus tick_waypoint(BtContext& ctx);
    BtStatus tick_pickup(BtContext& ctx);
    BtStatus tick_drop(BtContext& ctx);
    BtStatus tick_gripper(BtContext& ctx);
    BtStatus tick_randomwalk(BtContext& ctx);
    BtStatus tick_stop(BtContext& ctx);
    void finish(SkillState state, Json detail);

    const ScenarioFixture* fixture_;
    Blackboard blackboard_;
    BtNodePtr tree_;

    std::string active_skill_ = "idle";
    int active_action_id_ = 0;
    int next_action_id_ = 1;
    SearchStateMachine search_;
    WaypointStateMachine waypoint_;
    ManipStateMachine manip_;

    // per-tick scratch shared between decode/tick and the tree actions
    const PerceptionFrame* frame_ = nullptr;
    Actuation actuation_;
    std::vector<SkillEvent> events_;
};

}  // namespace deckhand
