#pragma once
// Deterministic 2D shipboard world: zones with sweep paths, labeled objects,
// Daniel, the robot, and the simulated clock. Single source of ground truth
// for the evaluation harness. Kinematics are a point robot with disc
// collision; identical (seed, command stream) gives an identical trajectory.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "deckhand/geometry.hpp"
#include "deckhand/knowledge.hpp"

namespace deckhand {

struct Zone {
    std::string name;
    Rect area;
    std::vector<Vec2> sweep_path;
    bool operator==(const Zone&) const = default;
};

struct NamedWaypoint {
    std::string id;
    Vec2 at;
    double tolerance = 0.0;  // success radius; 0 means exact arrival
    bool operator==(const NamedWaypoint&) const = default;
};

struct WorldObject {
    std::string id;
    std::string shape_class;  // ontology concept, e.g. THERMOSTAT
    std::string label;        // fiducial label
    double radius = 0.15;
    nlohmann::ordered_json features = nlohmann::ordered_json::object();  // age, color, ...
    Vec2 pose;
    bool held = false;
    bool operator==(const WorldObject&) const = default;
};

struct DialogueTurn {
    std::string marker;   // m1, m3, m5, m7
    std::string trigger;  // at-start | after-agent-reply | after-agent-question
    std::string text;
    bool operator==(const DialogueTurn&) const = default;
};

struct SituationPreload {
    InstanceId id;
    std::vector<std::pair<std::string, std::string>> slots;  // name -> symbol
};

struct ScenarioFixture {
    Rect bounds;
    int tick_budget = 600;
    double delivery_radius = 1.0;
    Date trial_date;
    double cruise_speed = 1.0;
    double grasp_radius = 0.5;
    double detection_range = 3.0;
    double label_range = 1.5;
    double approach_stop = 0.35;
    std::string version;

    std::vector<Zone> zones;
    std::vector<NamedWaypoint> waypoints;
    Vec2 daniel;
    Vec2 robot_start;
    std::vector<WorldObject> objects;
    std::vector<std::pair<int, FrameInstance>> episodic_preload;
    std::vector<SituationPreload> situation_preload;
    std::vector<DialogueTurn> dialogue;

    const Zone* zone(std::string_view name) const;
    const NamedWaypoint* waypoint(std::string_view id) const;
};

// Parses the canonical world fixture text. Throws ParseError / KnowledgeError
// when the layout is malformed or violates scenario invariants (a stores
// zone must exist and hold exactly one new and one old thermostat).
ScenarioFixture parse_fixture(std::string_view text);
ScenarioFixture canonical_fixture();

struct Actuation {
    Vec2 move;                               // requested displacement this tick
    bool random_walk = false;                // move one cruise step from the seeded stream
    std::optional<std::string> grab;         // object id to transfer to gripper
    std::optional<std::string> release;      // relative place ("floor")
    std::optional<bool> gripper_open;
    bool operator==(const Actuation&) const = default;
};

struct StepResult {
    bool collided = false;
    bool grab_ok = false;
    bool release_ok = false;
    std::string error;  // grasp-radius violation, empty-gripper drop, ...
};

class World {
public:
    static World spawn(const ScenarioFixture& fixture, uint64_t seed);

    StepResult step(const Actuation& actuation);

    int tick() const { return tick_; }
    const Vec2& robot_pose() const { return robot_pose_; }
    double robot_heading() const { return heading_; }
    double robot_speed() const { return last_speed_; }
    const std::optional<std::string>& gripper_contents() const { return gripper_; }
    bool collided() const { return collided_; }
    const Vec2& daniel_pose() const { return fixture_->daniel; }
    const std::vector<WorldObject>& objects() const { return objects_; }
    const WorldObject* object(std::string_view id) const;
    const ScenarioFixture& fixture() const { return *fixture_; }

    Vec2 random_direction();  // unit vector from the seeded stream

    // ground truth queries
    bool is_thermostat_delivered() const;
    nlohmann::ordered_json object_features_of(std::string_view id) const;
    std::optional<Vec2> object_location_of(std::string_view id) const;

    std::string state_hash() const;  // stable digest of the full state

private:
    const ScenarioFixture* fixture_ = nullptr;
    int tick_ = 0;
    Vec2 robot_pose_;
    double heading_ = 0.0;
    double last_speed_ = 0.0;
    bool collided_ = false;
    std::optional<std::string> gripper_;
    std::vector<WorldObject> objects_;
    std::mt19937_64 rng_;
};

}  // namespace deckhand
