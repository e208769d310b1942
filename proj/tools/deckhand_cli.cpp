// deckhand: scenario runner, batch evaluation, interactive dialogue, and
// transcript inspection for the shipboard maintenance testbed.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "deckhand/coding.hpp"
#include "deckhand/fixtures.hpp"
#include "deckhand/report.hpp"
#include "deckhand/runner.hpp"

namespace fs = std::filesystem;
using namespace deckhand;

namespace {

struct CliOptions {
    std::string agent = "ontoagent";
    std::string model;
    std::string condition = "ik";
    std::string backend = "live";
    int trials = 1;
    uint64_t seed = 0;
    std::string out_dir = "runs";
    std::string fixture_path;
    int budget = 0;
    int latency = -1;
    std::vector<std::string> recordings;
};

struct LoadedScenario {
    KnowledgeBase kb;
    ScenarioFixture fixture;
};

// Default scenario is embedded; --fixture points at a directory holding
// ontology.kf, scripts.kf, service-log.tsv, and world.kf overrides.
LoadedScenario load_scenario(const std::string& fixture_path) {
    auto read = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw ConfigError("cannot read fixture file " + p.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    if (fixture_path.empty()) {
        return LoadedScenario{
            KnowledgeBase::load(fixtures::ontology_text(), fixtures::scripts_text(),
                                fixtures::service_log_text()),
            canonical_fixture()};
    }
    fs::path dir(fixture_path);
    return LoadedScenario{
        KnowledgeBase::load(read(dir / "ontology.kf"), read(dir / "scripts.kf"),
                            read(dir / "service-log.tsv")),
        parse_fixture(read(dir / "world.kf"))};
}

RunConfig to_run_config(const CliOptions& opt) {
    RunConfig config;
    config.agent = opt.agent;
    config.model = opt.model;
    if (auto c = condition_from_name(opt.condition)) config.condition = *c;
    config.backend = opt.backend;
    config.trials = opt.trials;
    config.seed = opt.seed;
    config.out_dir = opt.out_dir;
    config.tick_budget = opt.budget;
    config.latency_ticks = opt.latency;
    config.recordings = opt.recordings;
    return config;
}

int cmd_run(const CliOptions& opt) {
    LoadedScenario scenario = load_scenario(opt.fixture_path);
    RunConfig config = to_run_config(opt);
    validate_config(config);
    GroundTruth truth{&scenario.fixture, &scenario.kb};

    int exit_code = 0;
    for (int i = 0; i < config.trials; ++i) {
        TrialResult result = run_trial(config, scenario.fixture, scenario.kb, i);
        MetricCoding coding = code_trial(result.transcript, truth);
        std::cout << "trial " << i << ": end=" << result.end_reason
                  << " tick=" << result.end_tick
                  << " completed=" << (coding.task_completed ? "yes" : "no")
                  << " premature=" << (coding.premature_action ? "yes" : "no")
                  << " correct-action=" << (coding.correct_action ? "yes" : "no");
        if (coding.cascade) std::cout << " cascade=" << *coding.cascade;
        std::cout << "\n";
        if (result.end_reason == "aborted") exit_code = 1;
    }
    return exit_code;
}

int cmd_eval(const std::string& dir, const std::string& out_dir,
             const std::string& fixture_path) {
    LoadedScenario scenario = load_scenario(fixture_path);
    GroundTruth truth{&scenario.fixture, &scenario.kb};

    std::vector<fs::path> files;
    if (!fs::exists(dir)) {
        std::cerr << "error: no such directory: " << dir << "\n";
        return 1;
    }
    for (const auto& entry : fs::recursive_directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        std::cerr << "error: no transcripts under " << dir << "\n";
        return 1;
    }

    std::vector<TrialCoding> codings;
    for (const auto& f : files) {
        try {
            TrialTranscript t = TrialTranscript::load(f.string());
            t.validate();
            codings.push_back(TrialCoding{t.header().agent, t.header().model,
                                          t.header().condition, code_trial(t, truth)});
        } catch (const std::exception& e) {
            std::cerr << "error: malformed transcript " << f << ": " << e.what() << "\n";
            return 1;
        }
    }
    Report report = aggregate_report(codings);
    std::cout << report.text;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream(fs::path(out_dir) / "report.txt", std::ios::binary) << report.text;
        std::ofstream(fs::path(out_dir) / "report.json", std::ios::binary)
            << report.machine.dump(2) << "\n";
        std::cout << "\nreport written to " << out_dir << "/report.{txt,json}\n";
    }
    return 0;
}

void render_world_line(const World& world, int tick) {
    const auto& pose = world.robot_pose();
    std::cout << "  [tick " << tick << "] robot (" << pose.x << ", " << pose.y << ")"
              << " gripper=" << (world.gripper_contents() ? *world.gripper_contents() : "-")
              << (world.is_thermostat_delivered() ? " DELIVERED" : "") << "\n";
}

int cmd_repl(const CliOptions& opt) {
    LoadedScenario scenario = load_scenario(opt.fixture_path);
    RunConfig config = to_run_config(opt);
    config.trials = 1;

    std::cout << "You are Daniel. Type a line to speak, press enter for silence, Ctrl-D to end.\n";
    config.interactive_daniel = [](int) -> std::optional<std::string> {
        std::cout << "daniel> " << std::flush;
        std::string line;
        if (!std::getline(std::cin, line)) return std::string("\x04");
        return line;
    };
    config.on_tick = render_world_line;
    config.on_event = [](const TranscriptEvent& e) {
        if (e.channel == Channel::Dialogue && e.payload.value("speaker", "") == "agent")
            std::cout << "agent: " << e.payload.value("text", "") << "\n";
        if (e.channel == Channel::Action)
            std::cout << "  -> " << e.payload.value("name", "")
                      << e.payload.value("params", Json::object()).dump() << "\n";
    };

    TrialResult result = run_trial(config, scenario.fixture, scenario.kb, 0);
    GroundTruth truth{&scenario.fixture, &scenario.kb};
    MetricCoding coding = code_trial(result.transcript, truth);
    std::cout << "session ended (" << result.end_reason
              << "); completed=" << (coding.task_completed ? "yes" : "no") << "\n";
    return 0;
}

int cmd_inspect(const std::string& path, const std::string& channel, const std::string& ticks) {
    TrialTranscript t = TrialTranscript::load(path);
    int lo = 0, hi = std::numeric_limits<int>::max();
    if (!ticks.empty()) {
        auto dots = ticks.find("..");
        if (dots == std::string::npos) {
            lo = hi = std::stoi(ticks);
        } else {
            lo = std::stoi(ticks.substr(0, dots));
            hi = std::stoi(ticks.substr(dots + 2));
        }
    }
    int shown = 0;
    for (const auto& e : t.events()) {
        if (e.tick < lo || e.tick > hi) continue;
        if (!channel.empty() && channel_name(e.channel) != channel) continue;
        std::cout << e.tick << " [" << channel_name(e.channel) << "] ";
        if (e.channel == Channel::Dialogue) {
            std::cout << e.payload.value("speaker", "") << ": " << e.payload.value("text", "");
        } else if (e.channel == Channel::Reasoning) {
            std::cout << e.payload.value("rule", "") << " "
                      << e.payload.value("refs", Json::array()).dump() << " "
                      << e.payload.value("note", "");
        } else if (e.channel == Channel::Action) {
            std::cout << e.payload.value("name", "")
                      << e.payload.value("params", Json::object()).dump();
        } else if (e.channel == Channel::Outcome) {
            std::cout << e.payload.value("name", "") << " -> " << e.payload.value("state", "")
                      << " (" << e.payload.value("note", "") << ")";
        } else {
            std::cout << e.payload.dump();
        }
        std::cout << "\n";
        ++shown;
    }
    if (shown == 0) std::cout << "no events\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deckhand: dual-layer shipboard maintenance agent testbed"};
    app.require_subcommand(1);

    CliOptions opt;

    auto add_run_flags = [&](CLI::App* cmd) {
        cmd->add_option("--agent", opt.agent, "strategic layer: ontoagent | llm");
        cmd->add_option("--model", opt.model, "model id (llm agent)");
        cmd->add_option("--condition", opt.condition, "ik | ke")
            ->check(CLI::IsMember({"ik", "ke"}));
        cmd->add_option("--backend", opt.backend, "live | replay")
            ->check(CLI::IsMember({"live", "replay"}));
        cmd->add_option("--trials", opt.trials, "number of trials");
        cmd->add_option("--seed", opt.seed, "world seed");
        cmd->add_option("--out", opt.out_dir, "transcript output directory");
        cmd->add_option("--fixture", opt.fixture_path, "scenario fixture directory");
        cmd->add_option("--budget", opt.budget, "tick budget override");
        cmd->add_option("--latency", opt.latency, "strategic latency in ticks");
        cmd->add_option("--recording", opt.recordings,
                        "recorded transcript(s) for replay, one per trial");
    };

    CLI::App* run = app.add_subcommand("run", "run scenario trials");
    add_run_flags(run);

    CLI::App* eval = app.add_subcommand("eval", "code transcripts and aggregate the report");
    std::string eval_dir, eval_out, eval_fixture;
    eval->add_option("dir", eval_dir, "directory of trial transcripts")->required();
    eval->add_option("--out", eval_out, "directory for report.txt / report.json");
    eval->add_option("--fixture", eval_fixture, "scenario fixture directory");

    CLI::App* repl = app.add_subcommand("repl", "interactive session; you play Daniel");
    add_run_flags(repl);

    CLI::App* inspect = app.add_subcommand("inspect", "render transcript events");
    std::string inspect_path, inspect_channel, inspect_ticks;
    inspect->add_option("transcript", inspect_path, "transcript file")->required();
    inspect->add_option("--channel", inspect_channel,
                        "dialogue|action|outcome|perception|tool|reasoning|exchange");
    inspect->add_option("--tick", inspect_ticks, "tick or range lo..hi");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(opt);
        if (eval->parsed()) return cmd_eval(eval_dir, eval_out, eval_fixture);
        if (repl->parsed()) return cmd_repl(opt);
        if (inspect->parsed()) return cmd_inspect(inspect_path, inspect_channel, inspect_ticks);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
