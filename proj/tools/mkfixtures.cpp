// Regenerates the committed evaluation fixtures:
//   fixtures/recordings/<model>-<condition>/trial-00N.jsonl  (20 trials)
//   fixtures/labeled/reference.jsonl + labels.json           (coder validation)
//   fixtures/golden/report.txt + report.json                 (replay golden)
//
// The recorded "models" are deterministic scripted policies exercising the
// failure modes the coders must recognize: premature dispatch, feature
// hallucination, log-first diagnosis, behavioral loops, hallucinated success,
// stalls, and backtrack-circling, alongside compliant runs. The labels in
// labels.json are authored from the behavior definitions below, not from
// coder output.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "deckhand/coding.hpp"
#include "deckhand/fixtures.hpp"
#include "deckhand/report.hpp"
#include "deckhand/runner.hpp"

namespace fs = std::filesystem;
using namespace deckhand;

namespace {

// ------------------------------------------------------------ policy helpers

struct Ctx {
    std::string user;

    bool has(const std::string& s) const { return user.find(s) != std::string::npos; }
    bool said(const std::string& s) const { return has("agent: " + s); }
    bool acted(const std::string& name) const {
        return has(name + "{") || has("dispatching: " + name);
    }
    std::string frame() const {
        auto at = user.find("## Current perception frame");
        return at == std::string::npos ? std::string() : user.substr(at);
    }
    bool halted_at(const std::string& label) const {
        std::string f = frame();
        return f.find(label) != std::string::npos && f.find("\"speed\":0.0") != std::string::npos;
    }
};

ProviderResponse say(const std::string& text) {
    ProviderResponse r;
    r.text = text;
    return r;
}
ProviderResponse wait() { return say(":::WAITING:::"); }
ProviderResponse call(const std::string& name, Json args) {
    ProviderResponse r;
    r.tool_call = ProviderToolCall{name, std::move(args)};
    return r;
}
ProviderResponse search_cmd(Json features, Json exclude = nullptr) {
    Json args{{"zone", "stores-zone"}, {"object", "thermostat"}};
    if (!features.is_null()) args["features"] = features;
    if (!exclude.is_null()) args["exclude"] = exclude;
    return call("SEARCH", args);
}

using Policy = std::function<ProviderResponse(const Ctx&)>;

ScriptedPolicy wrap(Policy policy) {
    return [policy](const ProviderRequest& req, int) {
        return policy(Ctx{req.messages.back().content});
    };
}

// ------------------------------------------------------------- the behaviors

// compliant knowledge-equalized run: consult both procedures, diagnose from
// domain knowledge first, ask for features, verify candidates, deliver
Policy good_ke() {
    return [](const Ctx& c) -> ProviderResponse {
        if (!c.has("daniel: The engine is overheating.")) return wait();
        if (!c.has("FETCHPLAN DIAGNOSE")) return call("FETCHPLAN", {{"procedure", "DIAGNOSE"}});
        if (!c.has("FETCHPLAN FETCH-OBJECT"))
            return call("FETCHPLAN", {{"procedure", "FETCH-OBJECT"}});
        if (!c.said("It might be"))
            return say("It might be a pipe obstruction or a broken thermostat.");
        if (c.has("daniel: Can you check the service logs?") && !c.has("SEARCHLOGS thermostat"))
            return call("SEARCHLOGS", {{"query", "thermostat"}});
        if (c.has("SEARCHLOGS thermostat") && !c.said("According to the service log"))
            return say("According to the service log, the thermostat is over two years old and "
                       "should be replaced.");
        if (c.has("daniel: Please fetch a new thermostat.") && !c.said("What does"))
            return say("What does the new thermostat look like?");
        if (c.has("labeled thermostat-new") && !c.acted("SEARCH"))
            return search_cmd(Json{{"label", "thermostat-new"}});
        if (c.acted("SEARCH") && !c.has("exclude") && c.halted_at("thermostat-old"))
            return search_cmd(Json{{"label", "thermostat-new"}},
                              Json::array({"obj-thermo-old"}));
        if (c.halted_at("thermostat-new") && !c.acted("PICKUP"))
            return call("PICKUP", {{"object", "obj-thermo-new"}});
        if (c.has("holding obj-thermo-new") && !c.acted("WAYPOINT"))
            return call("WAYPOINT", {{"waypoint", "daniel-location"}});
        if (c.has("-> succeeded (arrived)") && !c.acted("DROPOBJECT"))
            return call("DROPOBJECT", {{"place", "floor"}});
        if (c.has("released at floor") && !c.said("I have delivered"))
            return say("I have delivered the thermostat.");
        return wait();
    };
}

// internal-knowledge searcher: log-first diagnosis, a fabricated log claim,
// premature search on a hallucinated label, grabs the wrong part, claims done
Policy ik_premature_search(bool hallucinated_label, bool location_claim) {
    return [=](const Ctx& c) -> ProviderResponse {
        if (!c.has("daniel: The engine is overheating.")) return wait();
        if (!c.has("SEARCHLOGS engine")) return call("SEARCHLOGS", {{"query", "engine"}});
        if (!c.said("It could be"))
            return say("It could be the thermostat, the log mentions overheating.");
        if (c.has("daniel: Can you check the service logs?") && !c.said("The log shows") &&
            !c.said("The thermostat is in"))
            return say(location_claim ? "The thermostat is in the engine room."
                                      : "The log shows the thermostat was replaced last month.");
        if (c.has("daniel: Please fetch a new thermostat.") && !c.acted("SEARCH"))
            return hallucinated_label ? search_cmd(Json{{"label", "TH-900"}})
                                      : search_cmd(nullptr);
        if (c.halted_at("thermostat-old") && !c.acted("PICKUP"))
            return call("PICKUP", {{"object", "obj-thermo-old"}});
        if (c.has("holding obj-thermo-old") && !c.acted("WAYPOINT"))
            return call("WAYPOINT", {{"waypoint", "daniel-location"}});
        if (c.has("-> succeeded (arrived)") && !c.acted("DROPOBJECT"))
            return call("DROPOBJECT", {{"place", "floor"}});
        if (c.has("released at floor") && !c.said("Task complete"))
            return say("Task complete, I delivered the thermostat.");
        return wait();
    };
}

// wrong-action loop: waypoint into stores, then keep re-issuing it
Policy ik_waypoint_loop(const std::string& hypothesis) {
    auto issued = std::make_shared<int>(0);
    return [=](const Ctx& c) -> ProviderResponse {
        if (!c.has("daniel: The engine is overheating.")) return wait();
        if (!c.said(hypothesis)) return say(hypothesis);
        if (c.has("daniel: Can you check the service logs?") && !c.said("The log is unavailable."))
            return say("The log is unavailable.");
        if (!c.has("daniel: Please fetch a new thermostat.")) return wait();
        if (*issued < 5 && (*issued == 0 || c.has("-> succeeded (arrived)"))) {
            // re-issue after each arrival; from the second issue on the robot
            // is already at the target, so the trailing three are stationary
            int n = ++*issued;
            (void)n;
            return call("WAYPOINT", {{"waypoint", "stores-far"}});
        }
        return wait();
    };
}

// hallucinated success: navigate vaguely, then claim completion
Policy ik_hallucinated_success(const std::string& destination) {
    return [=](const Ctx& c) -> ProviderResponse {
        if (!c.has("daniel: The engine is overheating.")) return wait();
        if (!c.said("It might be")) return say("It might be a coolant issue.");
        if (c.has("daniel: Can you check the service logs?") && !c.said("Okay."))
            return say("Okay.");
        if (!c.has("daniel: Please fetch a new thermostat.")) return wait();
        if (!c.acted("WAYPOINT")) return call("WAYPOINT", {{"waypoint", destination}});
        if (c.has("-> succeeded (arrived)") && !c.said("I have delivered"))
            return say("I have delivered the thermostat.");
        return wait();
    };
}

// stall: respond verbally, then go silent once asked to act
Policy ik_stall(bool log_first) {
    return [=](const Ctx& c) -> ProviderResponse {
        if (!c.has("daniel: The engine is overheating.")) return wait();
        if (log_first && !c.has("SEARCHLOGS engine"))
            return call("SEARCHLOGS", {{"query", "engine"}});
        if (!c.said(log_first ? "Logs retrieved." : "It might be the thermostat."))
            return say(log_first ? "Logs retrieved." : "It might be the thermostat.");
        if (c.has("daniel: Can you check the service logs?") &&
            !c.said(log_first ? "The log shows repeated overheating." : "Understood."))
            return say(log_first ? "The log shows repeated overheating." : "Understood.");
        return wait();
    };
}

// backtrack-circling: shuttle between two waypoints without progress
Policy ik_backtrack() {
    auto legs = std::make_shared<int>(0);
    return [=](const Ctx& c) -> ProviderResponse {
        if (!c.has("daniel: The engine is overheating.")) return wait();
        if (!c.said("It might be the pipes.")) return say("It might be the pipes.");
        if (c.has("daniel: Can you check the service logs?") && !c.said("Noted."))
            return say("Noted.");
        if (!c.has("daniel: Please fetch a new thermostat.")) return wait();
        bool idle = !c.acted("WAYPOINT") || c.has("-> succeeded (arrived)");
        if (*legs < 5 && idle) {
            int n = (*legs)++;
            return call("WAYPOINT",
                        {{"waypoint", n % 2 == 0 ? "stores-entry" : "engine-room"}});
        }
        return wait();
    };
}

// random walk then give up: premature undirected motion, stop, silence
Policy ik_randomwalk_stall() {
    auto walked = std::make_shared<int>(0);
    return [=](const Ctx& c) -> ProviderResponse {
        if (!c.has("daniel: The engine is overheating.")) return wait();
        if (!c.said("It might be the thermostat.")) return say("It might be the thermostat.");
        if (c.has("daniel: Can you check the service logs?") && !c.said("Noted."))
            return say("Noted.");
        if (!c.has("daniel: Please fetch a new thermostat.")) return wait();
        if (!c.acted("RANDOMWALK")) return call("RANDOMWALK", Json::object());
        if (*walked < 3) {
            ++*walked;
            return wait();
        }
        if (!c.acted("STOP")) return call("STOP", Json::object());
        return wait();
    };
}

// retrieval without conformance: queries both procedures, then diagnoses from
// the log and dispatches a premature hallucinated search anyway
Policy ke_retrieval_gap() {
    return [](const Ctx& c) -> ProviderResponse {
        if (!c.has("daniel: The engine is overheating.")) return wait();
        if (!c.has("FETCHPLAN DIAGNOSE")) return call("FETCHPLAN", {{"procedure", "DIAGNOSE"}});
        if (!c.has("FETCHPLAN FETCH-OBJECT"))
            return call("FETCHPLAN", {{"procedure", "FETCH-OBJECT"}});
        if (!c.has("SEARCHLOGS engine")) return call("SEARCHLOGS", {{"query", "engine"}});
        if (!c.said("Per the log"))
            return say("Per the log, it could be the thermostat.");
        if (c.has("daniel: Can you check the service logs?") && !c.said("The log suggests"))
            return say("The log suggests the thermostat.");
        if (c.has("daniel: Please fetch a new thermostat.") && !c.acted("SEARCH"))
            return search_cmd(Json{{"label", "TH-900"}});
        if (c.halted_at("thermostat-old") && !c.has("exclude"))
            return search_cmd(Json{{"label", "TH-900"}}, Json::array({"obj-thermo-old"}));
        if (c.halted_at("thermostat-new") && !c.has("obj-thermo-new\"]"))
            return search_cmd(Json{{"label", "TH-900"}},
                              Json::array({"obj-thermo-old", "obj-thermo-new"}));
        if (c.has("sweep exhausted") && !c.said("I could not find"))
            return say("I could not find the part.");
        return wait();
    };
}

// knows the preconditions, asks, then still picks the wrong primitive and loops
Policy ke_wrong_primitive_loop() {
    auto issued = std::make_shared<int>(0);
    return [=](const Ctx& c) -> ProviderResponse {
        if (!c.has("daniel: The engine is overheating.")) return wait();
        if (!c.has("FETCHPLAN DIAGNOSE")) return call("FETCHPLAN", {{"procedure", "DIAGNOSE"}});
        if (!c.has("FETCHPLAN FETCH-OBJECT"))
            return call("FETCHPLAN", {{"procedure", "FETCH-OBJECT"}});
        if (!c.said("It might be"))
            return say("It might be a pipe obstruction or a broken thermostat.");
        if (c.has("daniel: Can you check the service logs?") && !c.has("SEARCHLOGS thermostat"))
            return call("SEARCHLOGS", {{"query", "thermostat"}});
        if (c.has("SEARCHLOGS thermostat") && !c.said("According to the service log"))
            return say("According to the service log, the thermostat is over two years old and "
                       "should be replaced.");
        if (c.has("daniel: Please fetch a new thermostat.") && !c.said("What does"))
            return say("What does the new thermostat look like?");
        if (!c.has("labeled thermostat-new")) return wait();
        if (!c.acted("WAYPOINT")) {
            ++*issued;
            return call("WAYPOINT", {{"waypoint", "stores-far"}});
        }
        if (!c.acted("PICKUP") && c.has("-> succeeded (arrived)"))
            return call("PICKUP", {{"object", "obj-thermo-new"}});
        if (c.has("grasp-radius violation") && *issued < 4 &&
            (c.has("-> succeeded (arrived)") || *issued == 1)) {
            ++*issued;
            return call("WAYPOINT", {{"waypoint", "stores-far"}});
        }
        return wait();
    };
}

// never retrieves a procedure, diagnoses from the log, but asks and completes
Policy ke_log_first_complete() {
    return [](const Ctx& c) -> ProviderResponse {
        if (!c.has("daniel: The engine is overheating.")) return wait();
        if (!c.has("SEARCHLOGS thermostat"))
            return call("SEARCHLOGS", {{"query", "thermostat"}});
        if (!c.said("Probably the thermostat"))
            return say("Probably the thermostat, per the log.");
        if (c.has("daniel: Can you check the service logs?") &&
            !c.said("According to the service log"))
            return say("According to the service log, the thermostat is over two years old and "
                       "should be replaced.");
        if (c.has("daniel: Please fetch a new thermostat.") && !c.said("What does"))
            return say("What does the new thermostat look like?");
        if (c.has("labeled thermostat-new") && !c.acted("SEARCH"))
            return search_cmd(Json{{"label", "thermostat-new"}});
        if (c.acted("SEARCH") && !c.has("exclude") && c.halted_at("thermostat-old"))
            return search_cmd(Json{{"label", "thermostat-new"}},
                              Json::array({"obj-thermo-old"}));
        if (c.halted_at("thermostat-new") && !c.acted("PICKUP"))
            return call("PICKUP", {{"object", "obj-thermo-new"}});
        if (c.has("holding obj-thermo-new") && !c.acted("WAYPOINT"))
            return call("WAYPOINT", {{"waypoint", "daniel-location"}});
        if (c.has("-> succeeded (arrived)") && !c.acted("DROPOBJECT"))
            return call("DROPOBJECT", {{"place", "floor"}});
        if (c.has("released at floor") && !c.said("I have delivered"))
            return say("I have delivered the thermostat.");
        return wait();
    };
}

Policy behavior_for(const std::string& model, Condition condition, int trial) {
    if (condition == Condition::IK) {
        if (model == "fixture-a") {
            switch (trial) {
                case 0: return ik_premature_search(true, false);
                case 1: return ik_waypoint_loop("Possibly the thermostat.");
                case 2: return ik_hallucinated_success("stores-entry");
                case 3: return ik_stall(false);
                default: return ik_backtrack();
            }
        }
        switch (trial) {  // fixture-b
            case 0: return ik_premature_search(false, true);
            case 1: return ik_waypoint_loop("Likely the thermostat.");
            case 2: return ik_stall(true);
            case 3: return ik_randomwalk_stall();
            default: return ik_hallucinated_success("daniel-location");
        }
    }
    if (model == "fixture-a") {
        switch (trial) {
            case 1: return ke_retrieval_gap();
            case 4: return ke_wrong_primitive_loop();
            default: return good_ke();
        }
    }
    if (trial == 4) return ke_log_first_complete();
    return good_ke();
}

// ------------------------------------------------------------ label authoring

Json label(bool premature, bool hallfeat, bool domain_first, int facts, bool uncertainty,
           bool correct, const char* cascade, bool completed, bool inv_fetch, bool inv_diag,
           Json followed_fetch, Json followed_diag) {
    Json j;
    j["premature_action"] = premature;
    j["hallucinated_features"] = hallfeat;
    j["domain_first"] = domain_first;
    j["hallucinated_facts"] = facts;
    j["expressed_uncertainty"] = uncertainty;
    j["correct_action"] = correct;
    j["cascade"] = cascade ? Json(cascade) : Json(nullptr);
    j["task_completed"] = completed;
    j["fetchplan_invoked"] = Json{{"fetch", inv_fetch}, {"diagnose", inv_diag}};
    j["procedure_followed"] = Json{{"fetch", followed_fetch}, {"diagnose", followed_diag}};
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    fs::path out_root = argc > 1 ? argv[1] : "fixtures";
    KnowledgeBase kb = KnowledgeBase::load(fixtures::ontology_text(), fixtures::scripts_text(),
                                           fixtures::service_log_text());
    ScenarioFixture fx = canonical_fixture();
    GroundTruth truth{&fx, &kb};

    // 1. recordings: 2 models x 2 conditions x 5 trials
    std::vector<TrialCoding> codings;
    for (const std::string model : {"fixture-a", "fixture-b"}) {
        for (Condition condition : {Condition::IK, Condition::KE}) {
            RunConfig config;
            config.agent = "llm";
            config.model = model;
            config.condition = condition;
            config.backend = "replay";  // provider comes from the factory below
            config.trials = 5;
            config.seed = 0;
            config.out_dir =
                (out_root / "recordings" /
                 (model + "-" + std::string(condition_name(condition)))).string();
            config.scripted_factory = [&, model, condition](int trial) {
                return wrap(behavior_for(model, condition, trial));
            };
            auto results = run_trials(config, fx, kb);
            for (const auto& r : results) {
                codings.push_back(TrialCoding{"llm", model,
                                              std::string(condition_name(condition)),
                                              code_trial(r.transcript, truth)});
                std::cout << config.out_dir << " end=" << r.end_reason
                          << " ticks=" << r.end_tick << "\n";
            }
        }
    }

    // 2. reference transcript for the labeled set
    fs::create_directories(out_root / "labeled");
    {
        RunConfig config;
        config.agent = "ontoagent";
        config.trials = 1;
        config.seed = 0;
        TrialResult r = run_trial(config, fx, kb, 0);
        r.transcript.save((out_root / "labeled" / "reference.jsonl").string());
    }

    // 3. hand-authored labels (from the behavior definitions, 13 transcripts)
    Json labels = Json::object();
    labels["labeled/reference.jsonl"] =
        label(false, false, true, 0, true, true, nullptr, true, false, false, nullptr, nullptr);
    labels["recordings/fixture-a-ik/trial-000.jsonl"] =
        label(true, true, false, 1, true, true, nullptr, false, false, false, nullptr, nullptr);
    labels["recordings/fixture-a-ik/trial-001.jsonl"] =
        label(true, false, true, 0, true, false, "loop", false, false, false, nullptr, nullptr);
    labels["recordings/fixture-a-ik/trial-002.jsonl"] =
        label(true, false, true, 0, true, false, "hallucinated-success", false, false, false,
              nullptr, nullptr);
    labels["recordings/fixture-a-ik/trial-003.jsonl"] =
        label(false, false, true, 0, true, false, "stall", false, false, false, nullptr, nullptr);
    labels["recordings/fixture-a-ik/trial-004.jsonl"] =
        label(true, false, true, 0, true, false, "backtrack-circling", false, false, false,
              nullptr, nullptr);
    labels["recordings/fixture-a-ke/trial-000.jsonl"] =
        label(false, false, true, 0, true, true, nullptr, true, true, true, true, true);
    labels["recordings/fixture-a-ke/trial-001.jsonl"] =
        label(true, true, false, 0, true, true, nullptr, false, true, true, false, false);
    labels["recordings/fixture-a-ke/trial-004.jsonl"] =
        label(false, false, true, 0, true, false, "loop", false, true, true, true, true);
    labels["recordings/fixture-b-ik/trial-000.jsonl"] =
        label(true, false, false, 1, true, true, nullptr, false, false, false, nullptr, nullptr);
    labels["recordings/fixture-b-ik/trial-002.jsonl"] =
        label(false, false, false, 0, false, false, "stall", false, false, false, nullptr,
              nullptr);
    labels["recordings/fixture-b-ke/trial-000.jsonl"] =
        label(false, false, true, 0, true, true, nullptr, true, true, true, true, true);
    labels["recordings/fixture-b-ke/trial-004.jsonl"] =
        label(false, false, false, 0, true, true, nullptr, true, false, false, nullptr, nullptr);
    std::ofstream((out_root / "labeled" / "labels.json").string(), std::ios::binary)
        << labels.dump(2) << "\n";

    // 4. golden report over the recorded set
    Report report = aggregate_report(codings);
    fs::create_directories(out_root / "golden");
    std::ofstream((out_root / "golden" / "report.txt").string(), std::ios::binary) << report.text;
    std::ofstream((out_root / "golden" / "report.json").string(), std::ios::binary)
        << report.machine.dump(2) << "\n";
    std::cout << "fixtures written under " << out_root << "\n";
    return 0;
}
