#include "deckhand/llm.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "deckhand/fixtures.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

namespace deckhand {

std::string_view condition_name(Condition c) { return c == Condition::IK ? "ik" : "ke"; }

std::optional<Condition> condition_from_name(std::string_view name) {
    if (name == "ik") return Condition::IK;
    if (name == "ke") return Condition::KE;
    return std::nullopt;
}

Json ProviderRequest::to_json() const {
    Json j;
    j["model"] = model;
    j["temperature"] = temperature;
    Json msgs = Json::array();
    for (const auto& m : messages) msgs.push_back(Json{{"role", m.role}, {"content", m.content}});
    j["messages"] = msgs;
    j["tools"] = tools;
    return j;
}

ProviderRequest ProviderRequest::from_json(const Json& j) {
    ProviderRequest r;
    r.model = j.at("model").get<std::string>();
    r.temperature = j.at("temperature").get<double>();
    for (const auto& m : j.at("messages"))
        r.messages.push_back(
            {m.at("role").get<std::string>(), m.at("content").get<std::string>()});
    for (const auto& t : j.at("tools")) r.tools.push_back(t.get<std::string>());
    return r;
}

Json ProviderResponse::to_json() const {
    Json j;
    if (tool_call) {
        j["tool_call"] = Json{{"name", tool_call->name}, {"args", tool_call->args}};
    } else {
        j["text"] = text;
    }
    return j;
}

ProviderResponse ProviderResponse::from_json(const Json& j) {
    ProviderResponse r;
    if (j.contains("tool_call")) {
        r.tool_call = ProviderToolCall{j.at("tool_call").at("name").get<std::string>(),
                                       j.at("tool_call").at("args")};
    } else {
        r.text = j.at("text").get<std::string>();
    }
    return r;
}

ReplayProvider::ReplayProvider(const TrialTranscript& recording) {
    for (const auto& e : recording.events()) {
        if (e.channel != Channel::Exchange) continue;
        exchanges_.emplace_back(ProviderRequest::from_json(e.payload.at("request")),
                                ProviderResponse::from_json(e.payload.at("response")));
    }
}

ProviderResponse ReplayProvider::complete(const ProviderRequest& request) {
    if (next_ >= exchanges_.size())
        throw ProviderError("replay recording exhausted at call " + std::to_string(next_));
    const auto& [recorded_request, recorded_response] = exchanges_[next_];
    if (!(recorded_request == request))
        throw ProviderError("replay mismatch at call " + std::to_string(next_) +
                            ": regenerated request differs from the recording");
    ++next_;
    return recorded_response;
}

std::string LiveProvider::vendor_for_model(std::string_view model) {
    if (model.rfind("claude", 0) == 0) return "anthropic";
    if (model.rfind("gpt", 0) == 0) return "openai";
    if (model.rfind("gemini", 0) == 0) return "google";
    return "openai";
}

LiveProvider::LiveProvider(std::string model, double temperature) : model_(std::move(model)) {
    if (temperature != 0.0) throw ProviderError("live exchanges run at temperature 0 only");
}

Json LiveProvider::wire_body(const ProviderRequest& request) {
    const std::string vendor = vendor_for_model(request.model);
    Json tools = Json::array();
    for (const auto& name : request.tools) {
        Json params = Json::object();
        if (const CommandSchema* schema = command_schema(name)) {
            Json props = Json::object();
            Json required = Json::array();
            for (const auto& p : schema->params) {
                props[p.name] = Json{{"type", p.type}, {"description", p.description}};
                if (p.required) required.push_back(p.name);
            }
            params = Json{{"type", "object"}, {"properties", props}, {"required", required}};
        } else if (name == "SEARCHLOGS") {
            params = Json{{"type", "object"},
                          {"properties", Json{{"query", Json{{"type", "string"}}}}},
                          {"required", Json::array({"query"})}};
        } else if (name == "FETCHPLAN") {
            params = Json{{"type", "object"},
                          {"properties", Json{{"procedure", Json{{"type", "string"}}}}},
                          {"required", Json::array({"procedure"})}};
        }
        if (vendor == "anthropic") {
            tools.push_back(Json{{"name", name}, {"input_schema", params}});
        } else if (vendor == "google") {
            tools.push_back(Json{{"name", name}, {"parameters", params}});
        } else {
            tools.push_back(Json{
                {"type", "function"},
                {"function", Json{{"name", name}, {"parameters", params}}}});
        }
    }

    Json body;
    if (vendor == "anthropic") {
        body["model"] = request.model;
        body["max_tokens"] = 1024;
        body["temperature"] = request.temperature;
        std::string system;
        Json messages = Json::array();
        for (const auto& m : request.messages) {
            if (m.role == "system")
                system += m.content;
            else
                messages.push_back(Json{{"role", "user"}, {"content", m.content}});
        }
        body["system"] = system;
        body["messages"] = messages;
        body["tools"] = tools;
    } else if (vendor == "google") {
        Json contents = Json::array();
        std::string system;
        for (const auto& m : request.messages) {
            if (m.role == "system")
                system += m.content;
            else
                contents.push_back(Json{
                    {"role", "user"},
                    {"parts", Json::array({Json{{"text", m.content}}})}});
        }
        body["system_instruction"] = Json{{"parts", Json::array({Json{{"text", system}}})}};
        body["contents"] = contents;
        body["tools"] = Json::array({Json{{"function_declarations", tools}}});
        body["generationConfig"] = Json{{"temperature", request.temperature}};
    } else {
        body["model"] = request.model;
        body["temperature"] = request.temperature;
        Json messages = Json::array();
        for (const auto& m : request.messages)
            messages.push_back(Json{{"role", m.role}, {"content", m.content}});
        body["messages"] = messages;
        body["tools"] = tools;
    }
    return body;
}

ProviderResponse LiveProvider::complete(const ProviderRequest& request) {
    const std::string vendor = vendor_for_model(request.model);
    const char* key_var = vendor == "anthropic" ? "ANTHROPIC_API_KEY"
                          : vendor == "google"  ? "GOOGLE_API_KEY"
                                                : "OPENAI_API_KEY";
    const char* key = std::getenv(key_var);
    if (!key || !*key)
        throw ProviderError(std::string("missing credentials: set ") + key_var);

    Json body = wire_body(request);
    httplib::SSLClient client(vendor == "anthropic" ? "api.anthropic.com"
                              : vendor == "google"  ? "generativelanguage.googleapis.com"
                                                    : "api.openai.com");
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    std::string path;
    if (vendor == "anthropic") {
        headers = {{"x-api-key", key}, {"anthropic-version", "2023-06-01"}};
        path = "/v1/messages";
    } else if (vendor == "google") {
        path = "/v1beta/models/" + request.model + ":generateContent?key=" + key;
    } else {
        headers = {{"Authorization", std::string("Bearer ") + key}};
        path = "/v1/chat/completions";
    }
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) throw ProviderError("provider request failed: no response");
    if (res->status != 200)
        throw ProviderError("provider request failed: HTTP " + std::to_string(res->status) +
                            ": " + res->body);

    Json j = Json::parse(res->body);
    ProviderResponse out;
    if (vendor == "anthropic") {
        for (const auto& block : j.at("content")) {
            if (block.at("type") == "tool_use") {
                out.tool_call = ProviderToolCall{block.at("name").get<std::string>(),
                                                 block.value("input", Json::object())};
                return out;
            }
            if (block.at("type") == "text") out.text += block.at("text").get<std::string>();
        }
    } else if (vendor == "google") {
        const auto& parts = j.at("candidates").at(0).at("content").at("parts");
        for (const auto& part : parts) {
            if (part.contains("functionCall")) {
                out.tool_call =
                    ProviderToolCall{part.at("functionCall").at("name").get<std::string>(),
                                     part.at("functionCall").value("args", Json::object())};
                return out;
            }
            if (part.contains("text")) out.text += part.at("text").get<std::string>();
        }
    } else {
        const auto& message = j.at("choices").at(0).at("message");
        if (message.contains("tool_calls") && !message.at("tool_calls").empty()) {
            const auto& tc = message.at("tool_calls").at(0).at("function");
            out.tool_call = ProviderToolCall{
                tc.at("name").get<std::string>(),
                Json::parse(tc.value("arguments", std::string("{}")))};
            return out;
        }
        if (!message.at("content").is_null()) out.text = message.at("content").get<std::string>();
    }
    return out;
}

std::string build_system_prompt(Condition condition) {
    std::string prompt(fixtures::system_prompt_base());
    if (condition == Condition::KE) prompt += std::string(fixtures::fetchplan_tool_block());
    return prompt;
}

std::vector<std::string> llm_tool_names(Condition condition) {
    std::vector<std::string> names;
    for (const auto& s : command_schemas()) names.push_back(s.name);
    names.push_back("SEARCHLOGS");
    if (condition == Condition::KE) names.push_back("FETCHPLAN");
    return names;
}

ParsedOutput parse_output(const ProviderResponse& response, Condition condition) {
    if (response.tool_call) {
        const auto& call = *response.tool_call;
        if (call.name == "SEARCHLOGS") {
            if (!call.args.contains("query") || !call.args.at("query").is_string())
                return InvalidOutput{"SEARCHLOGS: missing string parameter 'query'", call.args,
                                     call.name};
            return KnowledgeToolCall{"SEARCHLOGS", call.args};
        }
        if (call.name == "FETCHPLAN") {
            if (condition != Condition::KE)
                return InvalidOutput{"FETCHPLAN: tool not available under internal-knowledge",
                                     call.args, call.name};
            if (!call.args.contains("procedure") || !call.args.at("procedure").is_string())
                return InvalidOutput{"FETCHPLAN: missing string parameter 'procedure'", call.args,
                                     call.name};
            return KnowledgeToolCall{"FETCHPLAN", call.args};
        }
        Command cmd{call.name, call.args.is_object() ? call.args : Json::object()};
        if (std::string err = validate_command(cmd); !err.empty())
            return InvalidOutput{err, call.args, call.name};
        return cmd;
    }
    std::string text = response.text;
    auto first = text.find_first_not_of(" \t\r\n");
    auto last = text.find_last_not_of(" \t\r\n");
    std::string trimmed =
        first == std::string::npos ? std::string() : text.substr(first, last - first + 1);
    if (trimmed == kWaitingSignal) return Waiting{};
    if (trimmed.empty()) return Waiting{};
    return Utterance{trimmed};
}

FetchplanResult fetchplan(std::string_view procedure, Condition condition) {
    if (condition != Condition::KE)
        return {false, "tool not available under internal-knowledge"};
    if (procedure == "FETCH-OBJECT") return {true, std::string(fixtures::narrative_fetch_object())};
    if (procedure == "DIAGNOSE") return {true, std::string(fixtures::narrative_diagnose())};
    return {false, "unknown procedure '" + std::string(procedure) +
                       "'; available: FETCH-OBJECT, DIAGNOSE"};
}

LlmAgent::LlmAgent(std::string model, Condition condition, Provider* provider,
                   const KnowledgeBase* kb)
    : model_(std::move(model)),
      condition_(condition),
      provider_(provider),
      kb_(kb),
      system_prompt_(build_system_prompt(condition)) {}

ProviderRequest LlmAgent::build_context(const TrialTranscript& prefix,
                                        const PerceptionFrame& frame) const {
    ProviderRequest req;
    req.model = model_;
    req.temperature = 0.0;
    req.tools = llm_tool_names(condition_);
    req.messages.push_back({"system", system_prompt_});

    std::ostringstream user;
    user << "## Dialogue so far\n";
    bool any_dialogue = false;
    for (const auto& e : prefix.events()) {
        if (e.channel != Channel::Dialogue) continue;
        user << e.payload.value("speaker", "?") << ": " << e.payload.value("text", "") << "\n";
        any_dialogue = true;
    }
    if (!any_dialogue) user << "(none)\n";

    user << "\n## Your prior actions and outcomes\n";
    std::map<int, std::string> outcomes;
    for (const auto& e : prefix.events()) {
        if (e.channel != Channel::Outcome) continue;
        outcomes[e.payload.value("id", 0)] =
            e.payload.value("state", "") + " (" + e.payload.value("note", "") + ")";
    }
    bool any_action = false;
    size_t decoded_commands = 0;
    for (const auto& e : prefix.events()) {
        if (e.channel != Channel::Action) continue;
        int id = e.payload.value("id", 0);
        std::string name = e.payload.value("name", "");
        if (name != "SEARCHLOGS" && name != "FETCHPLAN") ++decoded_commands;
        user << "tick " << e.tick << ": " << name
             << e.payload.value("params", Json::object()).dump() << " -> ";
        auto it = outcomes.find(id);
        user << (it != outcomes.end() ? it->second : std::string("in progress")) << "\n";
        any_action = true;
    }
    // command calls still inside the dispatch latency window
    std::vector<std::string> command_calls;
    for (const auto& e : prefix.events()) {
        if (e.channel != Channel::Exchange || !e.payload.contains("response")) continue;
        const Json& resp = e.payload.at("response");
        if (!resp.contains("tool_call")) continue;
        std::string name = resp.at("tool_call").value("name", "");
        if (name == "SEARCHLOGS" || name == "FETCHPLAN") continue;
        command_calls.push_back(name + resp.at("tool_call").value("args", Json::object()).dump());
    }
    for (size_t i = decoded_commands; i < command_calls.size(); ++i) {
        user << "dispatching: " << command_calls[i] << "\n";
        any_action = true;
    }
    if (!any_action) user << "(none)\n";

    user << "\n## Knowledge tool results\n";
    bool any_tool = false;
    for (const auto& e : prefix.events()) {
        if (e.channel != Channel::Tool) continue;
        user << e.payload.value("tool", "") << " " << e.payload.value("query", "") << ": "
             << e.payload.value("result", Json()).dump() << "\n";
        any_tool = true;
    }
    if (!any_tool) user << "(none)\n";

    user << "\n## Episodic memory of observed objects\n";
    for (const auto& p : prefix.header().episodic_preload)
        user << p.get<std::string>() << " (prior knowledge)\n";
    std::vector<std::pair<std::string, int>> seen;  // id -> first tick, insertion order
    for (const auto& e : prefix.events()) {
        if (e.channel != Channel::Perception) continue;
        if (!e.payload.contains("detections")) continue;
        for (const auto& d : e.payload.at("detections")) {
            std::string id = d.value("id", "");
            bool known = false;
            for (auto& [sid, st] : seen) known = known || sid == id;
            if (!known) seen.emplace_back(id, e.tick);
        }
    }
    for (const auto& [id, t] : seen) user << id << " first seen at tick " << t << "\n";

    user << "\n## Current perception frame\n" << frame.to_json().dump() << "\n";
    user << "\nRespond with one tool call, one short utterance, or " << kWaitingSignal << ".";
    req.messages.push_back({"user", user.str()});
    return req;
}

ProviderResponse LlmAgent::exchange(const ProviderRequest& request) {
    return provider_->complete(request);
}

}  // namespace deckhand
