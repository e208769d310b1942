#include "deckhand/runner.hpp"

#include <algorithm>
#include <deque>
#include <filesystem>

namespace deckhand {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

Json render_preload(const ScenarioFixture& fixture) {
    Json arr = Json::array();
    for (const auto& [tick, frame] : fixture.episodic_preload) {
        std::string entry = frame.id.concept_name;
        for (const auto& s : frame.slots) {
            entry += " " + s.name + " ";
            if (const auto* cr = s.value.get<ConceptRef>())
                entry += lower(cr->concept_name);
            else
                entry += s.value.render();
        }
        arr.push_back(entry);
    }
    return arr;
}

struct PendingCommand {
    int effect_tick = 0;
    Command cmd;
    int action_id = 0;
};

}  // namespace

void validate_config(const RunConfig& config) {
    if (config.agent != "ontoagent" && config.agent != "llm")
        throw ConfigError("agent must be 'ontoagent' or 'llm'");
    if (config.trials < 0) throw ConfigError("trials must be non-negative");
    if (config.agent == "llm") {
        if (config.model.empty()) throw ConfigError("llm agent requires a model id");
        if (config.backend != "live" && config.backend != "replay")
            throw ConfigError("backend must be 'live' or 'replay'");
        if (config.backend == "replay" && !config.scripted_factory &&
            static_cast<int>(config.recordings.size()) < config.trials)
            throw ConfigError("replay requires one recording per trial");
    }
}

TrialResult run_trial(const RunConfig& config, const ScenarioFixture& fixture,
                      const KnowledgeBase& kb, int trial_index) {
    validate_config(config);
    const int budget = config.tick_budget > 0 ? config.tick_budget : fixture.tick_budget;
    const int latency =
        config.latency_ticks >= 0 ? config.latency_ticks : (config.agent == "ontoagent" ? 0 : 1);

    World world = World::spawn(fixture, config.seed);
    TacticalController controller(&fixture);

    TranscriptHeader header;
    header.agent = config.agent;
    header.model = config.agent == "llm" ? config.model : "";
    header.condition =
        config.agent == "llm" ? std::string(condition_name(config.condition)) : "";
    header.seed = config.seed;
    header.fixture_version = fixture.version;
    header.tick_budget = budget;
    header.latency_ticks = latency;
    header.episodic_preload = render_preload(fixture);

    TrialTranscript transcript(header);
    std::optional<TranscriptWriter> writer;
    if (!config.out_dir.empty()) {
        std::filesystem::create_directories(config.out_dir);
        char name[32];
        std::snprintf(name, sizeof(name), "trial-%03d.jsonl", trial_index);
        writer.emplace(config.out_dir + "/" + name, header);
    }
    auto emit = [&](int tick, Channel ch, const Json& payload) {
        transcript.append(tick, ch, payload);
        if (writer) writer->append(tick, ch, payload);
        if (config.on_event) config.on_event(transcript.events().back());
    };

    std::optional<OntoAgent> onto;
    std::unique_ptr<Provider> provider;
    std::optional<LlmAgent> llm;
    if (config.agent == "ontoagent") {
        onto.emplace(&kb, &fixture);
    } else {
        if (config.scripted_factory) {
            provider = std::make_unique<ScriptedProvider>(config.scripted_factory(trial_index));
        } else if (config.backend == "replay") {
            provider = std::make_unique<ReplayProvider>(
                TrialTranscript::load(config.recordings[trial_index]));
        } else {
            provider = std::make_unique<LiveProvider>(config.model);
        }
        llm.emplace(config.model, config.condition, provider.get(), &kb);
    }

    size_t daniel_next = 0;
    int daniel_last_tick = 0;
    bool agent_replied = false;
    bool agent_questioned = false;
    constexpr int kDanielPatience = 8;

    std::deque<PendingCommand> pending;
    std::vector<AgentEvent> inbox;
    bool input_closed = false;
    int next_action_id = 1;
    int quiescent_run = 0;
    bool last_was_waiting = false;
    std::string end_reason;
    int end_tick = 0;

    for (int t = 1; t <= budget && end_reason.empty(); ++t) {
        end_tick = t;
        bool effect = false;

        // (1) Daniel's turn
        std::optional<std::pair<std::string, std::string>> turn;  // marker, text
        if (config.interactive_daniel) {
            if (!input_closed) {
                auto line = config.interactive_daniel(t);
                if (line && *line == "\x04")
                    input_closed = true;  // no more turns; let the trial wind down
                else if (line && !line->empty())
                    turn = {{}, *line};
            }
        } else if (daniel_next < fixture.dialogue.size()) {
            const DialogueTurn& d = fixture.dialogue[daniel_next];
            bool fire = false;
            if (d.trigger == "at-start")
                fire = true;
            else if (d.trigger == "after-agent-reply")
                fire = agent_replied || (t - daniel_last_tick >= kDanielPatience);
            else if (d.trigger == "after-agent-question")
                fire = agent_questioned;
            if (fire) {
                turn = {d.marker, d.text};
                ++daniel_next;
            }
        }
        if (turn) {
            Json p;
            p["speaker"] = "daniel";
            p["text"] = turn->second;
            if (!turn->first.empty()) p["marker"] = turn->first;
            emit(t, Channel::Dialogue, p);
            daniel_last_tick = t;
            agent_replied = false;
            agent_questioned = false;
            if (onto) inbox.push_back(DialogueHeard{"daniel", turn->second});
            effect = true;
        }

        // (2) perception encode
        PerceptionFrame frame = encode_frame(world, t);
        emit(t, Channel::Perception, frame.to_json());
        if (onto) onto->observe_frame(frame);

        // (3) strategic step
        auto note_say = [&](const std::string& text) {
            agent_replied = true;
            if (text.find('?') != std::string::npos) agent_questioned = true;
        };
        if (onto) {
            std::vector<AgentEvent> batch;
            std::swap(batch, inbox);
            if (batch.empty()) batch.push_back(ClockTick{});
            for (const auto& ev : batch) {
                AgentOutput out = onto->step(ev, t);
                for (const auto& r : out.reasoning) emit(t, Channel::Reasoning, r);
                for (const auto& tr : out.tool_records) {
                    emit(t, Channel::Tool, tr);
                    effect = true;
                }
                for (const auto& say : out.utterances) {
                    Json p;
                    p["speaker"] = "agent";
                    p["text"] = say.text;
                    p["gmr"] = say.gmr;
                    emit(t, Channel::Dialogue, p);
                    note_say(say.text);
                    effect = true;
                }
                for (const auto& cmd : out.commands) {
                    int id = next_action_id++;
                    onto->note_dispatch(id);
                    pending.push_back(PendingCommand{t + latency, cmd, id});
                    effect = true;
                }
            }
        } else {
            ProviderRequest req = llm->build_context(transcript, frame);
            ProviderResponse resp;
            bool aborted = false;
            try {
                resp = llm->exchange(req);
            } catch (const ProviderError& e) {
                Json ex;
                ex["request"] = req.to_json();
                ex["error"] = e.what();
                ex["aborted"] = true;
                emit(t, Channel::Exchange, ex);
                end_reason = "aborted";
                aborted = true;
            }
            if (!aborted) {
                Json ex;
                ex["request"] = req.to_json();
                ex["response"] = resp.to_json();
                ex["latency"] = latency;
                emit(t, Channel::Exchange, ex);

                ParsedOutput parsed = parse_output(resp, config.condition);
                last_was_waiting = std::holds_alternative<Waiting>(parsed);
                if (const auto* u = std::get_if<Utterance>(&parsed)) {
                    Json p;
                    p["speaker"] = "agent";
                    p["text"] = u->text;
                    emit(t, Channel::Dialogue, p);
                    note_say(u->text);
                    effect = true;
                } else if (const auto* k = std::get_if<KnowledgeToolCall>(&parsed)) {
                    Json tool;
                    tool["tool"] = k->tool;
                    if (k->tool == "SEARCHLOGS") {
                        std::string query = k->args.value("query", "");
                        tool["query"] = query;
                        Json result = Json::array();
                        for (const auto& e : kb.search_logs(query))
                            result.push_back(e.date.iso() + " " + e.component + " " + e.action +
                                             ": " + e.note);
                        tool["result"] = result;
                    } else {  // FETCHPLAN
                        std::string procedure = k->args.value("procedure", "");
                        tool["query"] = procedure;
                        FetchplanResult fr = fetchplan(procedure, config.condition);
                        tool["result"] = fr.text;
                        tool["ok"] = fr.ok;
                    }
                    emit(t, Channel::Tool, tool);
                    effect = true;
                } else if (const auto* c = std::get_if<Command>(&parsed)) {
                    int id = next_action_id++;
                    pending.push_back(PendingCommand{t + latency, *c, id});
                    effect = true;
                } else if (const auto* bad = std::get_if<InvalidOutput>(&parsed)) {
                    int id = next_action_id++;
                    Json a;
                    a["id"] = id;
                    a["name"] = bad->name;
                    a["params"] = bad->raw;
                    a["invalid"] = true;
                    emit(t, Channel::Action, a);
                    Json o;
                    o["id"] = id;
                    o["name"] = bad->name;
                    o["state"] = "failed";
                    o["note"] = bad->error;
                    emit(t, Channel::Outcome, o);
                    effect = true;
                }
            }
        }
        if (!end_reason.empty()) break;

        // (4) decode due commands
        while (!pending.empty() && pending.front().effect_tick <= t) {
            PendingCommand pc = pending.front();
            pending.pop_front();
            Json a;
            a["id"] = pc.action_id;
            a["name"] = pc.cmd.name;
            a["params"] = pc.cmd.params;
            emit(t, Channel::Action, a);
            DecodeResult dr = controller.decode_command(pc.cmd, t, pc.action_id);
            if (!dr.error.empty()) {
                Json o;
                o["id"] = pc.action_id;
                o["name"] = pc.cmd.name;
                o["state"] = "failed";
                o["note"] = dr.error;
                emit(t, Channel::Outcome, o);
                if (onto)
                    inbox.push_back(CommandOutcome{pc.action_id, pc.cmd.name, SkillState::Failed,
                                                   Json{{"note", dr.error}}});
            } else {
                for (const auto& ev : dr.events) {
                    Json o;
                    o["id"] = ev.action_id;
                    o["name"] = ev.command;
                    o["state"] = std::string(skill_state_name(ev.state));
                    o["note"] = ev.detail.value("note", "");
                    emit(t, Channel::Outcome, o);
                    if (onto)
                        inbox.push_back(CommandOutcome{ev.action_id, ev.command, ev.state,
                                                       ev.detail});
                }
            }
            effect = true;
        }

        // (5) tactical tick
        TickOutput out = controller.tick(frame, t);
        for (const auto& ev : out.events) {
            if (ev.candidate) {
                Json p;
                p["kind"] = "vmr";
                p["action_id"] = ev.action_id;
                p["candidate"] = ev.detail.value("candidate", "");
                p["vmr"] = ev.detail.value("vmr", "");
                emit(t, Channel::Perception, p);
                if (onto)
                    inbox.push_back(VmrCandidate{ev.action_id, ev.detail.value("vmr", "")});
                effect = true;
            } else {
                Json o;
                o["id"] = ev.action_id;
                o["name"] = ev.command;
                o["state"] = std::string(skill_state_name(ev.state));
                o["note"] = ev.detail.value("note", "");
                emit(t, Channel::Outcome, o);
                if (onto)
                    inbox.push_back(CommandOutcome{ev.action_id, ev.command, ev.state, ev.detail});
                effect = true;
            }
        }

        // (6) world step
        world.step(out.actuation);
        if (config.on_tick) config.on_tick(world, t);

        bool tactical_busy = controller.has_active_command();
        bool queued = !pending.empty() || !inbox.empty();
        bool agent_idle = onto ? onto->idle() : last_was_waiting;
        if (world.is_thermostat_delivered() && agent_idle && !tactical_busy && !queued) {
            end_reason = "completed";
            break;
        }
        if (effect || tactical_busy || queued)
            quiescent_run = 0;
        else if (++quiescent_run >= 30)
            end_reason = "quiescent";
    }
    if (end_reason.empty()) end_reason = "budget";

    // trailing frame so the terminal world state is visible to the coder
    PerceptionFrame final_frame = encode_frame(world, end_tick);
    emit(end_tick, Channel::Perception, final_frame.to_json());

    TrialResult result;
    result.transcript = std::move(transcript);
    result.delivered = world.is_thermostat_delivered();
    result.end_tick = end_tick;
    result.end_reason = end_reason;
    return result;
}

std::vector<TrialResult> run_trials(const RunConfig& config, const ScenarioFixture& fixture,
                                    const KnowledgeBase& kb) {
    validate_config(config);
    std::vector<TrialResult> results;
    for (int i = 0; i < config.trials; ++i) results.push_back(run_trial(config, fixture, kb, i));
    return results;
}

}  // namespace deckhand
