#include "deckhand/tactical.hpp"

#include <algorithm>
#include <cmath>

namespace deckhand {

namespace {

constexpr double kArrivalEps = 1e-9;

Blackboard::Role role_for_key(const std::string& key) {
    if (key.rfind("perception.", 0) == 0) return Blackboard::Role::Encoder;
    if (key.rfind("command.", 0) == 0) return Blackboard::Role::Decoder;
    if (key.rfind("status.", 0) == 0) return Blackboard::Role::Skill;
    throw WriteDisciplineError("key '" + key + "' belongs to no writer role");
}

}  // namespace

void Blackboard::set(const std::string& key, Json value, int tick, Role writer) {
    if (role_for_key(key) != writer)
        throw WriteDisciplineError("role violation writing '" + key + "'");
    entries_[key] = Entry{std::move(value), tick};
}

const Blackboard::Entry* Blackboard::get(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

Sequence::Sequence(std::string name, std::vector<BtNodePtr> children)
    : name_(std::move(name)), children_(std::move(children)) {}

BtStatus Sequence::tick(BtContext& ctx) {
    for (auto& c : children_) {
        BtStatus s = c->tick(ctx);
        if (s != BtStatus::Success) return s;
    }
    return BtStatus::Success;
}

Selector::Selector(std::string name, std::vector<BtNodePtr> children)
    : name_(std::move(name)), children_(std::move(children)) {}

BtStatus Selector::tick(BtContext& ctx) {
    for (auto& c : children_) {
        BtStatus s = c->tick(ctx);
        if (s != BtStatus::Failure) return s;
    }
    return BtStatus::Failure;
}

ConditionNode::ConditionNode(std::string name, std::function<bool(BtContext&)> predicate)
    : name_(std::move(name)), predicate_(std::move(predicate)) {}

BtStatus ConditionNode::tick(BtContext& ctx) {
    return predicate_(ctx) ? BtStatus::Success : BtStatus::Failure;
}

ActionNode::ActionNode(std::string name, std::function<BtStatus(BtContext&)> fn)
    : name_(std::move(name)), fn_(std::move(fn)) {}

BtStatus ActionNode::tick(BtContext& ctx) { return fn_(ctx); }

Inverter::Inverter(BtNodePtr child) : child_(std::move(child)) {}

BtStatus Inverter::tick(BtContext& ctx) {
    BtStatus s = child_->tick(ctx);
    if (s == BtStatus::Success) return BtStatus::Failure;
    if (s == BtStatus::Failure) return BtStatus::Success;
    return s;
}

Retry::Retry(int attempts, BtNodePtr child) : attempts_(attempts), child_(std::move(child)) {}

BtStatus Retry::tick(BtContext& ctx) {
    for (int i = 0; i < attempts_; ++i) {
        BtStatus s = child_->tick(ctx);
        if (s != BtStatus::Failure) return s;
    }
    return BtStatus::Failure;
}

Json PerceptionFrame::to_json() const {
    Json j;
    j["tick"] = tick;
    j["pose"] = Json{{"x", pose.x}, {"y", pose.y}, {"heading", heading}};
    j["speed"] = speed;
    Json dets = Json::array();
    for (const auto& d : detections) {
        Json dj;
        dj["id"] = d.id;
        dj["shape"] = d.shape_class;
        if (d.label) dj["label"] = *d.label;
        if (!d.features.empty()) dj["features"] = d.features;
        dj["distance"] = d.distance;
        dj["dx"] = d.relative.x;
        dj["dy"] = d.relative.y;
        dets.push_back(dj);
    }
    j["detections"] = dets;
    j["collision"] = collision;
    j["gripper"] = gripper ? Json(*gripper) : Json(nullptr);
    return j;
}

PerceptionFrame PerceptionFrame::from_json(const Json& j) {
    PerceptionFrame f;
    f.tick = j.at("tick").get<int>();
    f.pose = {j.at("pose").at("x").get<double>(), j.at("pose").at("y").get<double>()};
    f.heading = j.at("pose").at("heading").get<double>();
    f.speed = j.at("speed").get<double>();
    for (const auto& dj : j.at("detections")) {
        Detection d;
        d.id = dj.at("id").get<std::string>();
        d.shape_class = dj.at("shape").get<std::string>();
        if (dj.contains("label")) d.label = dj.at("label").get<std::string>();
        if (dj.contains("features")) d.features = dj.at("features");
        d.distance = dj.at("distance").get<double>();
        d.relative = {dj.at("dx").get<double>(), dj.at("dy").get<double>()};
        f.detections.push_back(std::move(d));
    }
    f.collision = j.at("collision").get<bool>();
    if (!j.at("gripper").is_null()) f.gripper = j.at("gripper").get<std::string>();
    return f;
}

PerceptionFrame encode_frame(const World& world, int tick) {
    PerceptionFrame f;
    f.tick = tick;
    f.pose = world.robot_pose();
    f.heading = world.robot_heading();
    f.speed = world.robot_speed();
    f.collision = world.collided();
    f.gripper = world.gripper_contents();
    const auto& fx = world.fixture();
    for (const auto& o : world.objects()) {
        if (o.held) continue;
        double d = distance(world.robot_pose(), o.pose);
        if (d > fx.detection_range) continue;
        Detection det;
        det.id = o.id;
        det.shape_class = o.shape_class;
        det.distance = d;
        det.relative = o.pose - world.robot_pose();
        if (d <= fx.label_range) {
            det.label = o.label;
            det.features = o.features;
        }
        f.detections.push_back(std::move(det));
    }
    std::sort(f.detections.begin(), f.detections.end(), [](const auto& a, const auto& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.id < b.id;
    });
    return f;
}

FrameDocument detection_to_vmr(const Detection& det, int tick) {
    FrameDocument doc;
    FrameInstance frame;
    frame.id = {det.shape_class, 1};
    frame.provenance = Provenance::Vmr;
    frame.tick = tick;
    frame.slots.push_back({"object-id", make_text(det.id)});
    if (det.label) frame.slots.push_back({"label", make_text(*det.label)});
    if (det.features.contains("age"))
        frame.slots.push_back({"age", make_number(det.features["age"].get<double>())});
    if (det.features.contains("color"))
        frame.slots.push_back({"color", make_text(det.features["color"].get<std::string>())});
    doc.frames.push_back(std::move(frame));
    return doc;
}

std::string_view skill_state_name(SkillState s) {
    switch (s) {
        case SkillState::Idle: return "idle";
        case SkillState::Running: return "running";
        case SkillState::Succeeded: return "succeeded";
        case SkillState::Failed: return "failed";
        case SkillState::Preempted: return "preempted";
    }
    return "idle";
}

TacticalController::TacticalController(const ScenarioFixture* fixture) : fixture_(fixture) {
    std::vector<BtNodePtr> safety;
    safety.push_back(std::make_unique<ConditionNode>(
        "collision", [this](BtContext&) { return frame_ && frame_->collision; }));
    safety.push_back(std::make_unique<ActionNode>("halt-motion", [this](BtContext&) {
        actuation_ = Actuation{};
        return BtStatus::Success;
    }));

    std::vector<BtNodePtr> run;
    run.push_back(std::make_unique<ConditionNode>(
        "skill-active", [this](BtContext&) { return active_skill_ != "idle"; }));
    run.push_back(std::make_unique<ActionNode>(
        "run-active-skill", [this](BtContext& ctx) { return run_active_skill(ctx); }));

    std::vector<BtNodePtr> roots;
    roots.push_back(std::make_unique<Sequence>("safety", std::move(safety)));
    roots.push_back(std::make_unique<Sequence>("engage", std::move(run)));
    roots.push_back(std::make_unique<ActionNode>("idle", [this](BtContext&) {
        actuation_ = Actuation{};
        return BtStatus::Success;
    }));
    tree_ = std::make_unique<Selector>("root", std::move(roots));
}

SkillEvent TacticalController::make_event(SkillState state, Json detail) const {
    SkillEvent e;
    e.action_id = active_action_id_;
    e.command = active_skill_ == "idle" ? "" : active_skill_;
    e.state = state;
    e.detail = std::move(detail);
    return e;
}

void TacticalController::finish(SkillState state, Json detail) {
    events_.push_back(make_event(state, std::move(detail)));
    active_skill_ = "idle";
    active_action_id_ = 0;
}

DecodeResult TacticalController::decode_command(const Command& cmd, int tick, int action_id) {
    DecodeResult result;
    if (std::string err = validate_command(cmd); !err.empty()) {
        result.error = std::move(err);
        return result;
    }

    events_.clear();

    bool resume_search = cmd.name == "SEARCH" && active_skill_ == "SEARCH";
    bool pickup_of_candidate = cmd.name == "PICKUP" && active_skill_ == "SEARCH" &&
                               search_.paused_candidate &&
                               cmd.params.value("object", "") == *search_.paused_candidate;

    if (active_action_id_ != 0) {
        if (pickup_of_candidate) {
            finish(SkillState::Succeeded,
                   Json{{"note", "candidate " + *search_.paused_candidate + " grounded"}});
        } else if (resume_search) {
            finish(SkillState::Preempted,
                   Json{{"note", search_.paused_candidate
                                     ? "candidate " + *search_.paused_candidate +
                                           " rejected, search resumed"
                                     : "superseded by SEARCH"}});
        } else {
            finish(SkillState::Preempted, Json{{"note", "superseded by " + cmd.name}});
        }
    }

    result.action_id = action_id != 0 ? action_id : next_action_id_++;
    if (action_id != 0) next_action_id_ = std::max(next_action_id_, action_id + 1);
    active_action_id_ = result.action_id;
    active_skill_ = cmd.name;

    if (cmd.name == "SEARCH") {
        if (!resume_search) {
            search_ = SearchStateMachine{};
            search_.to_path_start = true;
        }
        search_.zone = cmd.params.at("zone").get<std::string>();
        search_.object_type = cmd.params.at("object").get<std::string>();
        search_.expected_features =
            cmd.params.contains("features") ? cmd.params.at("features") : Json::object();
        if (cmd.params.contains("exclude"))
            for (const auto& e : cmd.params.at("exclude"))
                search_.exclude.insert(e.get<std::string>());
        search_.approaching.reset();
        search_.paused_candidate.reset();
    } else if (cmd.name == "WAYPOINT") {
        std::string id = cmd.params.at("waypoint").get<std::string>();
        const NamedWaypoint* wp = fixture_->waypoint(id);
        if (!wp) {
            result.events = std::move(events_);
            active_skill_ = "WAYPOINT";
            // resolve failure surfaces as the command's outcome, not a decode error
            finish(SkillState::Failed, Json{{"note", "unresolvable waypoint '" + id + "'"}});
            result.events.insert(result.events.end(), events_.begin(), events_.end());
            events_.clear();
            return result;
        }
        waypoint_ = WaypointStateMachine{wp->at, wp->tolerance};
    } else if (cmd.name == "PICKUP") {
        manip_ = ManipStateMachine{};
        manip_.object = cmd.params.at("object").get<std::string>();
    } else if (cmd.name == "DROPOBJECT") {
        manip_ = ManipStateMachine{};
        manip_.place = cmd.params.at("place").get<std::string>();
    } else if (cmd.name == "GRIPPER") {
        manip_ = ManipStateMachine{};
        manip_.place = cmd.params.at("state").get<std::string>();
    }

    Json params = cmd.params;
    blackboard_.set("command.active-skill", active_skill_, tick, Blackboard::Role::Decoder);
    blackboard_.set("command.skill-params", params, tick, Blackboard::Role::Decoder);
    result.events = std::move(events_);
    events_.clear();
    return result;
}

TickOutput TacticalController::tick(const PerceptionFrame& frame, int tick) {
    frame_ = &frame;
    actuation_ = Actuation{};
    events_.clear();

    blackboard_.set("perception.frame", frame.to_json(), tick, Blackboard::Role::Encoder);

    BtContext ctx{tick};
    tree_->tick(ctx);

    blackboard_.set("status.skill-status",
                    Json{{"skill", active_skill_},
                         {"state", active_action_id_ ? "running" : "idle"}},
                    tick, Blackboard::Role::Skill);

    TickOutput out;
    out.actuation = actuation_;
    out.events = std::move(events_);
    out.active_skill = active_skill_;
    events_.clear();
    frame_ = nullptr;
    return out;
}

BtStatus TacticalController::run_active_skill(BtContext& ctx) {
    if (active_skill_ == "SEARCH") return tick_search(ctx);
    if (active_skill_ == "WAYPOINT") return tick_waypoint(ctx);
    if (active_skill_ == "PICKUP") return tick_pickup(ctx);
    if (active_skill_ == "DROPOBJECT") return tick_drop(ctx);
    if (active_skill_ == "GRIPPER") return tick_gripper(ctx);
    if (active_skill_ == "RANDOMWALK") return tick_randomwalk(ctx);
    if (active_skill_ == "STOP") return tick_stop(ctx);
    return BtStatus::Failure;
}

BtStatus TacticalController::tick_search(BtContext& ctx) {
    const Zone* zone = fixture_->zone(search_.zone);
    if (!zone || zone->sweep_path.empty()) {
        finish(SkillState::Failed, Json{{"note", "unknown zone '" + search_.zone + "'"}});
        return BtStatus::Failure;
    }
    if (search_.paused_candidate) return BtStatus::Running;  // awaiting grounding verdict

    double speed = fixture_->cruise_speed;
    const Vec2& pose = frame_->pose;

    // candidate acquisition: nearest unexcluded detection of the target shape
    if (!search_.approaching) {
        for (const auto& d : frame_->detections) {
            std::string shape_lower = d.shape_class;
            std::transform(shape_lower.begin(), shape_lower.end(), shape_lower.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            if (shape_lower != search_.object_type && d.shape_class != search_.object_type)
                continue;
            if (search_.exclude.count(d.id)) continue;
            search_.approaching = d.id;
            break;
        }
    }

    if (search_.approaching) {
        const Detection* det = nullptr;
        for (const auto& d : frame_->detections)
            if (d.id == *search_.approaching) det = &d;
        if (!det) {
            search_.approaching.reset();  // lost sight; fall back to the sweep
        } else if (det->distance <= fixture_->approach_stop + kArrivalEps) {
            search_.paused_candidate = det->id;
            SkillEvent e = make_event(SkillState::Running,
                                      Json{{"candidate", det->id},
                                           {"vmr", render_frames(detection_to_vmr(*det, ctx.tick))}});
            e.candidate = true;
            events_.push_back(std::move(e));
            return BtStatus::Running;
        } else {
            Vec2 dir = (det->relative).normalized();
            double step = std::min(speed, det->distance - fixture_->approach_stop);
            actuation_.move = dir * step;
            return BtStatus::Running;
        }
    }

    // sweep: head to the path start, then walk the vertices in order
    Vec2 target;
    if (search_.to_path_start) {
        target = zone->sweep_path.front();
        if (distance(pose, target) <= kArrivalEps) {
            search_.to_path_start = false;
            search_.sweep_index = 1;
        }
    }
    if (!search_.to_path_start) {
        while (search_.sweep_index < zone->sweep_path.size() &&
               distance(pose, zone->sweep_path[search_.sweep_index]) <= kArrivalEps)
            ++search_.sweep_index;
        if (search_.sweep_index >= zone->sweep_path.size()) {
            finish(SkillState::Failed, Json{{"note", "sweep exhausted, no candidate matched"}});
            return BtStatus::Failure;
        }
        target = zone->sweep_path[search_.sweep_index];
    }
    Vec2 delta = target - pose;
    double d = delta.norm();
    actuation_.move = delta.normalized() * std::min(speed, d);
    return BtStatus::Running;
}

BtStatus TacticalController::tick_waypoint(BtContext&) {
    const Vec2& pose = frame_->pose;
    double d = distance(pose, waypoint_.target);
    double tol = std::max(waypoint_.tolerance, kArrivalEps) + kArrivalEps;
    if (d <= tol) {
        finish(SkillState::Succeeded, Json{{"note", "arrived"}});
        return BtStatus::Success;
    }
    double step = std::min(fixture_->cruise_speed, d - waypoint_.tolerance);
    actuation_.move = (waypoint_.target - pose).normalized() * step;
    return BtStatus::Running;
}

BtStatus TacticalController::tick_pickup(BtContext&) {
    if (!manip_.requested) {
        if (frame_->gripper) {
            finish(SkillState::Failed, Json{{"note", "gripper occupied"}});
            return BtStatus::Failure;
        }
        const Detection* det = nullptr;
        for (const auto& d : frame_->detections)
            if (d.id == manip_.object) det = &d;
        if (!det || det->distance > fixture_->grasp_radius) {
            finish(SkillState::Failed, Json{{"note", "grasp-radius violation"}});
            return BtStatus::Failure;
        }
        actuation_.grab = manip_.object;
        manip_.requested = true;
        return BtStatus::Running;
    }
    if (frame_->gripper && *frame_->gripper == manip_.object) {
        finish(SkillState::Succeeded, Json{{"note", "holding " + manip_.object}});
        return BtStatus::Success;
    }
    finish(SkillState::Failed, Json{{"note", "grasp failed"}});
    return BtStatus::Failure;
}

BtStatus TacticalController::tick_drop(BtContext&) {
    if (!manip_.requested) {
        if (!frame_->gripper) {
            finish(SkillState::Failed, Json{{"note", "empty-gripper drop"}});
            return BtStatus::Failure;
        }
        actuation_.release = manip_.place;
        manip_.requested = true;
        return BtStatus::Running;
    }
    if (!frame_->gripper) {
        finish(SkillState::Succeeded, Json{{"note", "released at " + manip_.place}});
        return BtStatus::Success;
    }
    finish(SkillState::Failed, Json{{"note", "release failed"}});
    return BtStatus::Failure;
}

BtStatus TacticalController::tick_gripper(BtContext&) {
    actuation_.gripper_open = manip_.place == "open";
    finish(SkillState::Succeeded, Json{{"note", "gripper " + manip_.place}});
    return BtStatus::Success;
}

BtStatus TacticalController::tick_randomwalk(BtContext&) {
    actuation_.random_walk = true;
    return BtStatus::Running;
}

BtStatus TacticalController::tick_stop(BtContext&) {
    actuation_ = Actuation{};
    finish(SkillState::Succeeded, Json{{"note", "motion halted"}});
    return BtStatus::Success;
}

}  // namespace deckhand
