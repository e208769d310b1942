#pragma once
// Drop-in LLM strategic layer: deterministic context construction from the
// transcript prefix, a neutral provider abstraction with live and replay
// backends, tool dispatch (SEARCHLOGS, FETCHPLAN under knowledge
// equalization), and action parsing onto the shared command surface.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "deckhand/commands.hpp"
#include "deckhand/knowledge.hpp"
#include "deckhand/tactical.hpp"
#include "deckhand/transcript.hpp"

namespace deckhand {

enum class Condition { IK, KE };

std::string_view condition_name(Condition c);
std::optional<Condition> condition_from_name(std::string_view name);

inline constexpr std::string_view kWaitingSignal = ":::WAITING:::";

struct ChatMessage {
    std::string role;  // system | user
    std::string content;
    bool operator==(const ChatMessage&) const = default;
};

struct ProviderRequest {
    std::string model;
    double temperature = 0.0;
    std::vector<ChatMessage> messages;
    std::vector<std::string> tools;

    Json to_json() const;
    static ProviderRequest from_json(const Json& j);
    bool operator==(const ProviderRequest&) const = default;
};

struct ProviderToolCall {
    std::string name;
    Json args = Json::object();
    bool operator==(const ProviderToolCall&) const = default;
};

struct ProviderResponse {
    std::string text;  // empty when the response is a tool call
    std::optional<ProviderToolCall> tool_call;

    Json to_json() const;
    static ProviderResponse from_json(const Json& j);
    bool operator==(const ProviderResponse&) const = default;
};

struct ProviderError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Provider {
public:
    virtual ~Provider() = default;
    virtual ProviderResponse complete(const ProviderRequest& request) = 0;
};

// Replays the exchanges recorded in a transcript, in order. The regenerated
// request must equal the recorded one; divergence or exhaustion throws.
class ReplayProvider : public Provider {
public:
    explicit ReplayProvider(const TrialTranscript& recording);
    ProviderResponse complete(const ProviderRequest& request) override;
    size_t remaining() const { return exchanges_.size() - next_; }

private:
    std::vector<std::pair<ProviderRequest, ProviderResponse>> exchanges_;
    size_t next_ = 0;
};

// Thin vendor adapters over provider HTTP APIs. Credentials come from the
// environment (ANTHROPIC_API_KEY, OPENAI_API_KEY, GOOGLE_API_KEY); the
// constructor rejects any temperature other than 0.
class LiveProvider : public Provider {
public:
    explicit LiveProvider(std::string model, double temperature = 0.0);
    ProviderResponse complete(const ProviderRequest& request) override;

    // exposed for tests: the vendor-specific wire body for a request
    static Json wire_body(const ProviderRequest& request);
    static std::string vendor_for_model(std::string_view model);  // anthropic|openai|google

private:
    std::string model_;
};

// Deterministic policy-backed provider used to author recorded fixtures.
using ScriptedPolicy = std::function<ProviderResponse(const ProviderRequest&, int call_index)>;

class ScriptedProvider : public Provider {
public:
    explicit ScriptedProvider(ScriptedPolicy policy) : policy_(std::move(policy)) {}
    ProviderResponse complete(const ProviderRequest& request) override {
        return policy_(request, call_index_++);
    }

private:
    ScriptedPolicy policy_;
    int call_index_ = 0;
};

// ------------------------------------------------------------------ agent

struct Waiting {};
struct Utterance {
    std::string text;
};
struct KnowledgeToolCall {
    std::string tool;  // SEARCHLOGS | FETCHPLAN
    Json args;
};
struct InvalidOutput {
    std::string error;
    Json raw;  // the offending tool call, for the action/outcome record
    std::string name;
};

using ParsedOutput = std::variant<Waiting, Utterance, Command, KnowledgeToolCall, InvalidOutput>;

std::string build_system_prompt(Condition condition);

// Tools visible to the model under a condition: the seven commands plus
// SEARCHLOGS, and FETCHPLAN only under KE.
std::vector<std::string> llm_tool_names(Condition condition);

ParsedOutput parse_output(const ProviderResponse& response, Condition condition);

struct FetchplanResult {
    bool ok = false;
    std::string text;  // narrative or error
};

FetchplanResult fetchplan(std::string_view procedure, Condition condition);

class LlmAgent {
public:
    LlmAgent(std::string model, Condition condition, Provider* provider,
             const KnowledgeBase* kb);

    // Deterministic context from the transcript prefix plus the current frame.
    ProviderRequest build_context(const TrialTranscript& prefix,
                                  const PerceptionFrame& frame) const;

    ProviderResponse exchange(const ProviderRequest& request);

    const std::string& model() const { return model_; }
    Condition condition() const { return condition_; }
    const KnowledgeBase* kb() const { return kb_; }

private:
    std::string model_;
    Condition condition_;
    Provider* provider_;
    const KnowledgeBase* kb_;
    std::string system_prompt_;
};

}  // namespace deckhand
