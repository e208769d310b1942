#include "deckhand/sim.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "deckhand/fixtures.hpp"

namespace deckhand {

namespace {

std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
        if (j > i) out.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

double to_num(const std::string& s, int line_no) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw ParseError("expected number, got '" + s + "'", line_no, 1);
    return v;
}

std::string strip_comment(std::string_view raw) {
    std::string out;
    bool in_quote = false;
    for (size_t i = 0; i < raw.size(); ++i) {
        char c = raw[i];
        if (!in_quote && c == '/' && i + 1 < raw.size() && raw[i + 1] == '/') break;
        if (c == '"') in_quote = !in_quote;
        out.push_back(c);
    }
    while (!out.empty() && (out.back() == ' ' || out.back() == '\t' || out.back() == '\r'))
        out.pop_back();
    return out;
}

}  // namespace

const Zone* ScenarioFixture::zone(std::string_view name) const {
    for (const auto& z : zones)
        if (z.name == name) return &z;
    return nullptr;
}

const NamedWaypoint* ScenarioFixture::waypoint(std::string_view id) const {
    for (const auto& w : waypoints)
        if (w.id == id) return &w;
    return nullptr;
}

ScenarioFixture parse_fixture(std::string_view text) {
    ScenarioFixture fx;
    fx.version = std::string(fixtures::kFixtureVersion);

    enum class Section { None, World, Zone, Object };
    Section section = Section::None;
    Zone* zone = nullptr;
    WorldObject* object = nullptr;

    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = strip_comment(raw);
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        bool indented = line[0] == ' ' || line[0] == '\t';
        std::string body = line.substr(line.find_first_not_of(" \t"));

        if (!indented) {
            auto toks = split_ws(body);
            const std::string& head = toks[0];
            section = Section::None;
            zone = nullptr;
            object = nullptr;
            if (head == "WORLD") {
                section = Section::World;
            } else if (head == "ZONE") {
                if (toks.size() != 2) throw ParseError("ZONE needs a name", line_no, 1);
                fx.zones.push_back(Zone{toks[1], {}, {}});
                zone = &fx.zones.back();
                section = Section::Zone;
            } else if (head == "WAYPOINT") {
                if (toks.size() < 4) throw ParseError("WAYPOINT needs id x y [tol]", line_no, 1);
                NamedWaypoint w{toks[1], {to_num(toks[2], line_no), to_num(toks[3], line_no)}, 0};
                if (toks.size() > 4) w.tolerance = to_num(toks[4], line_no);
                fx.waypoints.push_back(w);
            } else if (head == "DANIEL") {
                fx.daniel = {to_num(toks[1], line_no), to_num(toks[2], line_no)};
            } else if (head == "ROBOT") {
                fx.robot_start = {to_num(toks[1], line_no), to_num(toks[2], line_no)};
            } else if (head == "OBJECT") {
                if (toks.size() != 3) throw ParseError("OBJECT needs id and concept", line_no, 1);
                fx.objects.push_back(WorldObject{toks[1], toks[2], "", 0.15,
                                                 nlohmann::ordered_json::object(), {}, false});
                object = &fx.objects.back();
                section = Section::Object;
            } else if (head == "EPISODIC") {
                if (toks.size() < 5)
                    throw ParseError("EPISODIC needs tick concept slot filler", line_no, 1);
                FrameDocument d =
                    parse_frames("#" + toks[2] + ".1\n  " + toks[3] + " " + toks[4] + "\n");
                fx.episodic_preload.emplace_back(static_cast<int>(to_num(toks[1], line_no)),
                                                 d.frames[0]);
            } else if (head == "SITUATION") {
                if (toks.size() < 2) throw ParseError("SITUATION needs an instance id", line_no, 1);
                std::string decl = "#" + toks[1] + "\n";
                for (size_t i = 2; i + 1 < toks.size(); i += 2)
                    decl += "  " + toks[i] + " " + toks[i + 1] + "\n";
                FrameDocument d = parse_frames(decl);
                SituationPreload pre;
                pre.id = d.frames[0].id;
                for (const auto& s : d.frames[0].slots) {
                    const auto* t = s.value.get<Text>();
                    pre.slots.emplace_back(s.name, t ? t->value : s.value.render());
                }
                fx.situation_preload.push_back(std::move(pre));
            } else if (head == "DIALOGUE") {
                auto q0 = body.find('"');
                auto q1 = body.rfind('"');
                if (toks.size() < 3 || q0 == std::string::npos || q1 <= q0)
                    throw ParseError("DIALOGUE needs marker trigger \"text\"", line_no, 1);
                fx.dialogue.push_back(
                    DialogueTurn{toks[1], toks[2], body.substr(q0 + 1, q1 - q0 - 1)});
            } else {
                throw ParseError("unknown fixture section '" + head + "'", line_no, 1);
            }
            continue;
        }

        auto toks = split_ws(body);
        const std::string& key = toks[0];
        switch (section) {
            case Section::World: {
                if (key == "bounds") {
                    fx.bounds = Rect{to_num(toks[1], line_no), to_num(toks[2], line_no),
                                     to_num(toks[3], line_no), to_num(toks[4], line_no)};
                } else if (key == "tick-budget") {
                    fx.tick_budget = static_cast<int>(to_num(toks[1], line_no));
                } else if (key == "delivery-radius") {
                    fx.delivery_radius = to_num(toks[1], line_no);
                } else if (key == "trial-date") {
                    fx.trial_date = parse_date(toks[1]);
                } else if (key == "cruise-speed") {
                    fx.cruise_speed = to_num(toks[1], line_no);
                } else if (key == "grasp-radius") {
                    fx.grasp_radius = to_num(toks[1], line_no);
                } else if (key == "detection-range") {
                    fx.detection_range = to_num(toks[1], line_no);
                } else if (key == "label-range") {
                    fx.label_range = to_num(toks[1], line_no);
                } else if (key == "approach-stop") {
                    fx.approach_stop = to_num(toks[1], line_no);
                } else {
                    throw ParseError("unknown WORLD key '" + key + "'", line_no, 1);
                }
                break;
            }
            case Section::Zone: {
                if (key == "rect") {
                    zone->area = Rect{to_num(toks[1], line_no), to_num(toks[2], line_no),
                                      to_num(toks[3], line_no), to_num(toks[4], line_no)};
                } else if (key == "sweep") {
                    for (size_t i = 1; i + 1 < toks.size(); i += 2)
                        zone->sweep_path.push_back(
                            {to_num(toks[i], line_no), to_num(toks[i + 1], line_no)});
                } else {
                    throw ParseError("unknown ZONE key '" + key + "'", line_no, 1);
                }
                break;
            }
            case Section::Object: {
                if (key == "pose") {
                    object->pose = {to_num(toks[1], line_no), to_num(toks[2], line_no)};
                } else if (key == "radius") {
                    object->radius = to_num(toks[1], line_no);
                } else if (key == "label") {
                    object->label = toks[1];
                } else if (key == "age") {
                    object->features["age"] = to_num(toks[1], line_no);
                } else if (key == "color") {
                    object->features["color"] = toks[1];
                } else {
                    throw ParseError("unknown OBJECT key '" + key + "'", line_no, 1);
                }
                break;
            }
            default:
                throw ParseError("unexpected indented line", line_no, 1);
        }
    }

    // scenario invariants
    const Zone* stores = fx.zone("stores-zone");
    if (!stores) throw KnowledgeError("fixture is missing the stores-zone");
    if (stores->sweep_path.empty())
        throw KnowledgeError("stores-zone is missing a sweep path");
    int new_thermostats = 0, old_thermostats = 0;
    for (const auto& o : fx.objects) {
        if (o.shape_class != "THERMOSTAT" || !stores->area.contains(o.pose)) continue;
        double age = o.features.value("age", 0.5);
        if (age <= 0.1) ++new_thermostats;
        if (age >= 0.7) ++old_thermostats;
    }
    if (new_thermostats != 1 || old_thermostats != 1)
        throw KnowledgeError("stores-zone must hold exactly one new and one old thermostat");
    return fx;
}

ScenarioFixture canonical_fixture() { return parse_fixture(fixtures::world_text()); }

World World::spawn(const ScenarioFixture& fixture, uint64_t seed) {
    World w;
    w.fixture_ = &fixture;
    w.robot_pose_ = fixture.robot_start;
    w.objects_ = fixture.objects;
    w.rng_.seed(seed);
    return w;
}

const WorldObject* World::object(std::string_view id) const {
    for (const auto& o : objects_)
        if (o.id == id) return &o;
    return nullptr;
}

Vec2 World::random_direction() {
    std::uniform_real_distribution<double> dist(0.0, 2.0 * 3.14159265358979323846);
    double a = dist(rng_);
    return {std::cos(a), std::sin(a)};
}

StepResult World::step(const Actuation& actuation) {
    StepResult result;
    ++tick_;
    collided_ = false;

    Vec2 move = actuation.move;
    if (actuation.random_walk) move = random_direction() * fixture_->cruise_speed;
    double len = move.norm();
    if (len > 0) {
        heading_ = std::atan2(move.y, move.x);
        Vec2 target = robot_pose_ + move;

        // wall clamp
        const Rect& b = fixture_->bounds;
        Vec2 clamped{std::clamp(target.x, b.x0, b.x1), std::clamp(target.y, b.y0, b.y1)};
        if (!(clamped == target)) {
            collided_ = true;
            target = clamped;
        }
        // object disc clamp (held object excluded)
        for (const auto& o : objects_) {
            if (o.held) continue;
            double d = distance(target, o.pose);
            if (d < o.radius) {
                Vec2 away = (target - o.pose).normalized();
                if (away.norm() == 0) away = (robot_pose_ - o.pose).normalized();
                target = o.pose + away * o.radius;
                collided_ = true;
            }
        }
        last_speed_ = distance(robot_pose_, target);
        robot_pose_ = target;
    } else {
        last_speed_ = 0.0;
    }

    if (actuation.grab) {
        WorldObject* obj = nullptr;
        for (auto& o : objects_)
            if (o.id == *actuation.grab) obj = &o;
        if (!obj) {
            result.error = "unknown object '" + *actuation.grab + "'";
        } else if (gripper_) {
            result.error = "gripper occupied";
        } else if (distance(robot_pose_, obj->pose) > fixture_->grasp_radius) {
            result.error = "grasp-radius violation";
        } else {
            obj->held = true;
            gripper_ = obj->id;
            result.grab_ok = true;
        }
    }
    if (actuation.release) {
        if (!gripper_) {
            result.error = "empty-gripper drop";
        } else {
            for (auto& o : objects_) {
                if (o.id == *gripper_) {
                    o.held = false;
                    o.pose = robot_pose_ + Vec2{std::cos(heading_), std::sin(heading_)} * 0.3;
                    break;
                }
            }
            gripper_.reset();
            result.release_ok = true;
        }
    }

    // held object tracks the robot
    if (gripper_) {
        for (auto& o : objects_)
            if (o.id == *gripper_) o.pose = robot_pose_;
    }
    result.collided = collided_;
    return result;
}

bool World::is_thermostat_delivered() const {
    for (const auto& o : objects_) {
        if (o.shape_class != "THERMOSTAT" || o.held) continue;
        if (o.features.value("age", 1.0) > 0.1) continue;
        if (distance(o.pose, fixture_->daniel) <= fixture_->delivery_radius) return true;
    }
    return false;
}

nlohmann::ordered_json World::object_features_of(std::string_view id) const {
    const WorldObject* o = object(id);
    if (!o) return nlohmann::ordered_json::object();
    nlohmann::ordered_json f = o->features;
    f["label"] = o->label;
    return f;
}

std::optional<Vec2> World::object_location_of(std::string_view id) const {
    const WorldObject* o = object(id);
    if (!o || o->held) return std::nullopt;
    return o->pose;
}

std::string World::state_hash() const {
    std::ostringstream s;
    s.precision(17);
    s << tick_ << '|' << robot_pose_.x << ',' << robot_pose_.y << '|' << heading_ << '|'
      << (gripper_ ? *gripper_ : "-") << '|' << collided_;
    for (const auto& o : objects_)
        s << '|' << o.id << ':' << o.pose.x << ',' << o.pose.y << ':' << o.held;
    // FNV-1a 64
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s.str()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace deckhand
