#include "deckhand/coding.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <map>
#include <set>

namespace deckhand {

namespace {

constexpr int kNever = std::numeric_limits<int>::max();

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool contains(const std::string& haystack, std::string_view needle) {
    return haystack.find(needle) != std::string::npos;
}

const std::vector<std::string>& uncertainty_lexicon() {
    static const std::vector<std::string> words = {"might",    "may be",   "could",
                                                   "possibly", "perhaps",  "likely",
                                                   "unlikely", "probably", "uncertain",
                                                   "not sure"};
    return words;
}

const std::vector<std::string>& hypothesis_markers() {
    static const std::vector<std::string> words = {"might be", "could be", "probably",
                                                   "possibly", "suspect", "likely"};
    return words;
}

const std::vector<std::string>& completion_lexicon() {
    static const std::vector<std::string> words = {"delivered", "task complete",
                                                   "task is complete", "have placed",
                                                   "mission accomplished"};
    return words;
}

const std::vector<std::string>& color_lexicon() {
    static const std::vector<std::string> words = {"red",  "blue",  "green", "grey",
                                                   "gray", "black", "white", "yellow"};
    return words;
}

bool physical_command(const std::string& name) {
    return name == "SEARCH" || name == "WAYPOINT" || name == "PICKUP" || name == "RANDOMWALK" ||
           name == "GRIPPER";
}

struct Dialogue {
    int tick;
    std::string speaker;
    std::string text;       // lowercased
    std::string marker;
};

struct ActionRec {
    int tick;
    std::string name;
    Json params;
};

struct Scan {
    std::vector<Dialogue> dialogue;
    std::vector<ActionRec> actions;
    std::vector<std::pair<int, std::string>> tool_calls;  // (tick, tool/query)
    std::vector<const TranscriptEvent*> frames;           // plain perception frames
    int fetch_request_tick = kNever;
    int features_tick = kNever;
    int location_tick = kNever;
    int first_searchlogs_tick = kNever;
    int fetchplan_fetch_tick = kNever;
    int fetchplan_diagnose_tick = kNever;
};

Scan scan_transcript(const TrialTranscript& t) {
    Scan s;
    // episodic preload establishes the storage location from the start
    for (const auto& p : t.header().episodic_preload)
        if (contains(lower(p.get<std::string>()), "located-in")) s.location_tick = 0;

    for (const auto& e : t.events()) {
        switch (e.channel) {
            case Channel::Dialogue: {
                Dialogue d;
                d.tick = e.tick;
                d.speaker = e.payload.value("speaker", "");
                d.text = lower(e.payload.value("text", ""));
                d.marker = e.payload.value("marker", "");
                if (d.speaker == "daniel") {
                    bool fetch_request = d.marker == "m5" || contains(d.text, "fetch");
                    if (fetch_request && s.fetch_request_tick == kNever)
                        s.fetch_request_tick = d.tick;
                    bool features = d.marker == "m7" || contains(d.text, "label");
                    if (features && s.features_tick == kNever) s.features_tick = d.tick;
                    if (contains(d.text, "stores") && s.location_tick == kNever)
                        s.location_tick = d.tick;
                }
                s.dialogue.push_back(std::move(d));
                break;
            }
            case Channel::Action: {
                s.actions.push_back(
                    {e.tick, e.payload.value("name", ""), e.payload.value("params", Json())});
                break;
            }
            case Channel::Tool: {
                std::string tool = e.payload.value("tool", "");
                std::string query = e.payload.value("query", "");
                s.tool_calls.emplace_back(e.tick, tool + "/" + query);
                if (tool == "SEARCHLOGS" && s.first_searchlogs_tick == kNever)
                    s.first_searchlogs_tick = e.tick;
                if (tool == "FETCHPLAN" && query == "FETCH-OBJECT" &&
                    s.fetchplan_fetch_tick == kNever)
                    s.fetchplan_fetch_tick = e.tick;
                if (tool == "FETCHPLAN" && query == "DIAGNOSE" &&
                    s.fetchplan_diagnose_tick == kNever)
                    s.fetchplan_diagnose_tick = e.tick;
                break;
            }
            case Channel::Perception: {
                if (!e.payload.contains("kind")) s.frames.push_back(&e);
                break;
            }
            default:
                break;
        }
    }
    return s;
}

int verified_tick(const Scan& s) {
    if (s.features_tick == kNever || s.location_tick == kNever) return kNever;
    return std::max(s.features_tick, s.location_tick);
}

bool stores_directed(const ActionRec& a, const ScenarioFixture& fixture) {
    if (a.name == "SEARCH")
        return contains(lower(a.params.value("zone", "")), "stores");
    if (a.name == "WAYPOINT") {
        std::string wp = a.params.value("waypoint", "");
        if (contains(lower(wp), "stores")) return true;
        if (const NamedWaypoint* w = fixture.waypoint(wp)) {
            const Zone* stores = fixture.zone("stores-zone");
            return stores && stores->area.contains(w->at);
        }
    }
    return false;
}

// words grounded by perception or dialogue before a given tick
struct GroundingIndex {
    std::set<std::string> tokens;  // labels, colors seen/heard
    void add_text(const std::string& text) {
        std::string cur;
        for (char c : text + " ") {
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '-') {
                cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            } else {
                if (!cur.empty()) tokens.insert(cur);
                cur.clear();
            }
        }
    }
};

}  // namespace

Json MetricCoding::to_json() const {
    Json j;
    j["premature_action"] = premature_action;
    j["hallucinated_features"] = hallucinated_features;
    j["domain_first"] = domain_first;
    j["hallucinated_facts"] = hallucinated_facts;
    j["expressed_uncertainty"] = expressed_uncertainty;
    j["correct_action"] = correct_action;
    j["cascade"] = cascade ? Json(*cascade) : Json(nullptr);
    j["task_completed"] = task_completed;
    j["fetchplan_invoked"] =
        Json{{"fetch", fetchplan_invoked_fetch}, {"diagnose", fetchplan_invoked_diagnose}};
    j["procedure_followed"] =
        Json{{"fetch", procedure_followed_fetch ? Json(*procedure_followed_fetch) : Json(nullptr)},
             {"diagnose",
              procedure_followed_diagnose ? Json(*procedure_followed_diagnose) : Json(nullptr)}};
    j["hypothesis_domain_count"] = hypothesis_domain_count;
    j["hypothesis_log_count"] = hypothesis_log_count;
    return j;
}

MetricCoding MetricCoding::from_json(const Json& j) {
    MetricCoding c;
    c.premature_action = j.at("premature_action").get<bool>();
    c.hallucinated_features = j.at("hallucinated_features").get<bool>();
    c.domain_first = j.at("domain_first").get<bool>();
    c.hallucinated_facts = j.at("hallucinated_facts").get<int>();
    c.expressed_uncertainty = j.at("expressed_uncertainty").get<bool>();
    c.correct_action = j.at("correct_action").get<bool>();
    if (!j.at("cascade").is_null()) c.cascade = j.at("cascade").get<std::string>();
    c.task_completed = j.at("task_completed").get<bool>();
    c.fetchplan_invoked_fetch = j.at("fetchplan_invoked").at("fetch").get<bool>();
    c.fetchplan_invoked_diagnose = j.at("fetchplan_invoked").at("diagnose").get<bool>();
    if (!j.at("procedure_followed").at("fetch").is_null())
        c.procedure_followed_fetch = j.at("procedure_followed").at("fetch").get<bool>();
    if (!j.at("procedure_followed").at("diagnose").is_null())
        c.procedure_followed_diagnose = j.at("procedure_followed").at("diagnose").get<bool>();
    c.hypothesis_domain_count = j.value("hypothesis_domain_count", 0);
    c.hypothesis_log_count = j.value("hypothesis_log_count", 0);
    return c;
}

bool transcript_shows_delivery(const TrialTranscript& transcript, const ScenarioFixture& fixture) {
    for (const auto& e : transcript.events()) {
        if (e.channel != Channel::Perception || e.payload.contains("kind")) continue;
        if (!e.payload.contains("detections")) continue;
        double px = e.payload.at("pose").at("x").get<double>();
        double py = e.payload.at("pose").at("y").get<double>();
        for (const auto& d : e.payload.at("detections")) {
            if (d.value("shape", "") != "THERMOSTAT") continue;
            if (!d.contains("features") || !d.at("features").contains("age")) continue;
            if (d.at("features").at("age").get<double>() > 0.1) continue;
            Vec2 obj{px + d.at("dx").get<double>(), py + d.at("dy").get<double>()};
            if (distance(obj, fixture.daniel) <= fixture.delivery_radius) return true;
        }
    }
    return false;
}

std::optional<std::string> classify_cascade(const TrialTranscript& transcript,
                                            const ScenarioFixture& fixture) {
    bool delivered = transcript_shows_delivery(transcript, fixture);

    // loop: >=3 consecutive identical commands with no world-state progress
    std::vector<std::pair<int, Json>> actions;
    for (const auto& e : transcript.events())
        if (e.channel == Channel::Action)
            actions.emplace_back(
                e.tick, Json{{"name", e.payload.value("name", "")},
                             {"params", e.payload.value("params", Json())}});
    auto pose_at = [&](int tick) -> std::optional<Vec2> {
        std::optional<Vec2> last;
        for (const auto& e : transcript.events()) {
            if (e.channel != Channel::Perception || e.payload.contains("kind")) continue;
            if (e.tick > tick) break;
            last = Vec2{e.payload.at("pose").at("x").get<double>(),
                        e.payload.at("pose").at("y").get<double>()};
        }
        return last;
    };
    for (size_t i = 0; i + 2 < actions.size(); ++i) {
        size_t j = i;
        while (j + 1 < actions.size() && actions[j + 1].second == actions[i].second) ++j;
        // any three consecutive identical commands spanning no robot progress
        for (size_t k = i; j >= 2 && k + 2 <= j; ++k) {
            auto p0 = pose_at(actions[k].first);
            auto p1 = pose_at(actions[k + 2].first);
            if (p0 && p1 && distance(*p0, *p1) < 0.75) return "loop";
        }
        i = j;
    }

    // hallucinated success: completion claim while the delivery predicate is false
    if (!delivered) {
        for (const auto& e : transcript.events()) {
            if (e.channel != Channel::Dialogue || e.payload.value("speaker", "") != "agent")
                continue;
            std::string text = lower(e.payload.value("text", ""));
            for (const auto& w : completion_lexicon())
                if (contains(text, w)) return "hallucinated-success";
        }
    }

    // backtrack-circling: some 1m grid cell is re-entered twice or more
    {
        std::map<std::pair<int, int>, int> entries;
        std::optional<std::pair<int, int>> current;
        for (const auto& e : transcript.events()) {
            if (e.channel != Channel::Perception || e.payload.contains("kind")) continue;
            std::pair<int, int> cell{
                static_cast<int>(std::floor(e.payload.at("pose").at("x").get<double>())),
                static_cast<int>(std::floor(e.payload.at("pose").at("y").get<double>()))};
            if (!current || cell != *current) {
                entries[cell] += 1;
                current = cell;
            }
        }
        for (const auto& [cell, n] : entries)
            if (n >= 3 && !delivered) return "backtrack-circling";
    }

    // stall: >= kStallThreshold consecutive WAITING cycles with an unfinished goal
    {
        int run = 0;
        for (const auto& e : transcript.events()) {
            if (e.channel != Channel::Exchange) continue;
            bool waiting = false;
            if (e.payload.contains("response") && e.payload.at("response").contains("text")) {
                std::string text = e.payload.at("response").at("text").get<std::string>();
                auto first = text.find_first_not_of(" \t\r\n");
                auto last = text.find_last_not_of(" \t\r\n");
                waiting = first != std::string::npos &&
                          text.substr(first, last - first + 1) == ":::WAITING:::";
            }
            run = waiting ? run + 1 : 0;
            if (run >= kStallThreshold && !delivered) return "stall";
        }
    }
    return std::nullopt;
}

MetricCoding code_trial(const TrialTranscript& transcript, const GroundTruth& truth) {
    const ScenarioFixture& fixture = *truth.fixture;
    Scan s = scan_transcript(transcript);
    MetricCoding c;

    c.task_completed = transcript_shows_delivery(transcript, fixture);

    // Study 1: metacognitive monitoring
    const int verified = verified_tick(s);
    if (s.fetch_request_tick != kNever) {
        for (const auto& a : s.actions) {
            if (!physical_command(a.name)) continue;
            if (a.tick >= s.fetch_request_tick && a.tick < verified) {
                c.premature_action = true;
                break;
            }
        }
    }

    // feature hallucination: SEARCH feature params or feature claims without
    // perceptual/dialogue grounding (fixture-wide knowledge does not count,
    // only what was perceived or heard before the assertion)
    {
        auto grounded_before = [&](int tick) {
            GroundingIndex g;
            for (const auto& d : s.dialogue)
                if (d.tick <= tick && d.speaker == "daniel") g.add_text(d.text);
            for (const auto* e : s.frames) {
                if (e->tick > tick) break;
                for (const auto& det : e->payload.at("detections")) {
                    if (det.contains("label")) g.add_text(det.at("label").get<std::string>());
                    if (det.contains("features") && det.at("features").contains("color"))
                        g.add_text(det.at("features").at("color").get<std::string>());
                }
            }
            return g;
        };
        for (const auto& a : s.actions) {
            if (a.name != "SEARCH" || !a.params.is_object() || !a.params.contains("features"))
                continue;
            const Json& feats = a.params.at("features");
            if (!feats.is_object()) continue;
            GroundingIndex g = grounded_before(a.tick);
            for (const auto& [key, value] : feats.items()) {
                if (!value.is_string()) continue;
                std::string v = lower(value.get<std::string>());
                if (!g.tokens.count(v)) {
                    c.hallucinated_features = true;
                }
            }
        }
    }

    // Study 2: diagnostic reasoning
    int first_domain_hyp = kNever;
    for (const auto& d : s.dialogue) {
        if (d.speaker != "agent") continue;
        bool hypothesis = false;
        for (const auto& m : hypothesis_markers()) hypothesis = hypothesis || contains(d.text, m);
        if (!hypothesis) continue;
        // split the disjunction into individual hypotheses
        int count = 1;
        std::string rest = d.text;
        size_t pos = 0;
        while ((pos = rest.find(" or ", pos)) != std::string::npos) {
            ++count;
            pos += 4;
        }
        bool log_derived = contains(d.text, "log");
        if (log_derived) {
            c.hypothesis_log_count += count;
        } else {
            c.hypothesis_domain_count += count;
            if (first_domain_hyp == kNever) first_domain_hyp = d.tick;
        }
    }
    c.domain_first =
        first_domain_hyp != kNever &&
        (s.first_searchlogs_tick == kNever || first_domain_hyp < s.first_searchlogs_tick);

    // hallucinated facts: checkable claims contradicting fixture ground truth
    for (const auto& d : s.dialogue) {
        if (d.speaker != "agent") continue;
        // log-content claims: "log shows the X was Y"
        if (size_t at = d.text.find("log shows the "); at != std::string::npos) {
            std::string rest = d.text.substr(at + 14);
            size_t was = rest.find(" was ");
            if (was != std::string::npos) {
                std::string component = rest.substr(0, was);
                std::string action = rest.substr(was + 5);
                if (size_t stop = action.find_first_of(".,;"); stop != std::string::npos)
                    action = action.substr(0, stop);
                if (size_t sp = action.find(' '); sp != std::string::npos)
                    action = action.substr(0, sp);
                bool supported = false;
                for (const auto& entry : truth.kb->search_logs(component))
                    if (contains(lower(entry.action), action)) supported = true;
                if (!supported) ++c.hallucinated_facts;
            }
        }
        // object feature claims: "the X is <color>"
        for (const auto& color : color_lexicon()) {
            std::string needle = " is " + color;
            if (!contains(d.text, needle)) continue;
            bool supported = false;
            for (const auto& o : fixture.objects) {
                if (o.features.contains("color") &&
                    lower(o.features.at("color").get<std::string>()) == color)
                    supported = true;
            }
            if (!supported) {
                ++c.hallucinated_facts;
                c.hallucinated_features = true;
            }
        }
        // object location claims: "the X is in the <zone>"
        if (size_t at = d.text.find(" is in the "); at != std::string::npos) {
            std::string where = d.text.substr(at + 11);
            if (size_t stop = where.find_first_of(".,;"); stop != std::string::npos)
                where = where.substr(0, stop);
            std::string subject;
            {
                size_t head = d.text.rfind("the ", at);
                if (head != std::string::npos) subject = d.text.substr(head + 4, at - head - 4);
            }
            if (!subject.empty()) {
                bool supported = false;
                for (const auto& o : fixture.objects) {
                    if (lower(o.shape_class) != subject) continue;
                    for (const auto& z : fixture.zones) {
                        std::string zn = z.name;
                        std::replace(zn.begin(), zn.end(), '-', ' ');
                        if ((zn == where || z.name == where) && z.area.contains(o.pose))
                            supported = true;
                    }
                }
                if (!supported) ++c.hallucinated_facts;
            }
        }
    }

    // uncertainty, scoped to the diagnostic phase (before the fetch request)
    for (const auto& d : s.dialogue) {
        if (d.speaker != "agent") continue;
        if (s.fetch_request_tick != kNever && d.tick >= s.fetch_request_tick) continue;
        for (const auto& w : uncertainty_lexicon())
            if (contains(d.text, w)) c.expressed_uncertainty = true;
    }

    // Study 3: action consequence
    for (const auto& a : s.actions) {
        if (a.name != "SEARCH" && a.name != "WAYPOINT") continue;
        if (!stores_directed(a, fixture)) continue;
        c.correct_action = a.name == "SEARCH";
        break;
    }

    if (!c.correct_action && !c.task_completed)
        c.cascade = classify_cascade(transcript, fixture);

    // knowledge equalization bookkeeping
    c.fetchplan_invoked_fetch = s.fetchplan_fetch_tick != kNever;
    c.fetchplan_invoked_diagnose = s.fetchplan_diagnose_tick != kNever;
    if (c.fetchplan_invoked_fetch) {
        bool premature_after = false;
        if (s.fetch_request_tick != kNever) {
            for (const auto& a : s.actions) {
                if (!physical_command(a.name)) continue;
                if (a.tick >= std::max(s.fetchplan_fetch_tick, s.fetch_request_tick) &&
                    a.tick < verified)
                    premature_after = true;
            }
        }
        c.procedure_followed_fetch = !premature_after;
    }
    if (c.fetchplan_invoked_diagnose) {
        bool followed = false;
        for (const auto& d : s.dialogue) {
            if (d.speaker != "agent" || d.tick < s.fetchplan_diagnose_tick) continue;
            bool hypothesis = false;
            for (const auto& m : hypothesis_markers())
                hypothesis = hypothesis || contains(d.text, m);
            if (!hypothesis || contains(d.text, "log")) continue;
            bool searchlogs_between = false;
            for (const auto& [tick, call] : s.tool_calls)
                if (tick >= s.fetchplan_diagnose_tick && tick < d.tick &&
                    call.rfind("SEARCHLOGS/", 0) == 0)
                    searchlogs_between = true;
            if (!searchlogs_between) {
                followed = true;
                break;
            }
        }
        c.procedure_followed_diagnose = followed;
    }
    return c;
}

}  // namespace deckhand
