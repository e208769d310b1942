#pragma once
// Append-only trial transcript: a header line followed by one canonical-JSON
// event per line. Field order is fixed, so equal content serializes to equal
// bytes. Every action event is paired with exactly one later outcome event.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace deckhand {

using Json = nlohmann::ordered_json;

enum class Channel { Dialogue, Action, Outcome, Perception, Tool, Reasoning, Exchange };

std::string_view channel_name(Channel c);
std::optional<Channel> channel_from_name(std::string_view name);

struct TranscriptHeader {
    std::string agent;       // ontoagent | llm
    std::string model;       // model id, empty for ontoagent
    std::string condition;   // ik | ke, empty for ontoagent
    uint64_t seed = 0;
    std::string fixture_version;
    int tick_budget = 0;
    int latency_ticks = 0;
    Json episodic_preload = Json::array();  // rendered preload entries

    Json to_json() const;
    static TranscriptHeader from_json(const Json& j);
};

struct TranscriptEvent {
    int tick = 0;
    Channel channel = Channel::Dialogue;
    Json payload;

    Json to_json() const;
    static TranscriptEvent from_json(const Json& j);
};

struct TranscriptError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class TrialTranscript {
public:
    TrialTranscript() = default;
    explicit TrialTranscript(TranscriptHeader header) : header_(std::move(header)) {}

    void append(int tick, Channel channel, Json payload);  // throws on tick regression

    const TranscriptHeader& header() const { return header_; }
    const std::vector<TranscriptEvent>& events() const { return events_; }

    std::vector<const TranscriptEvent*> channel_events(Channel c) const;

    std::string serialize() const;  // canonical JSONL, byte-stable
    static TrialTranscript parse(std::string_view text);  // throws TranscriptError

    void save(const std::string& path) const;
    static TrialTranscript load(const std::string& path);

    // action/outcome pairing: every action id has exactly one outcome
    void validate() const;

private:
    TranscriptHeader header_;
    std::vector<TranscriptEvent> events_;
};

// Incremental writer: header immediately, then one flushed line per event.
class TranscriptWriter {
public:
    TranscriptWriter(std::string path, const TranscriptHeader& header);
    ~TranscriptWriter();
    void append(int tick, Channel channel, const Json& payload);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace deckhand
