#include "deckhand/transcript.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace deckhand {

std::string_view channel_name(Channel c) {
    switch (c) {
        case Channel::Dialogue: return "dialogue";
        case Channel::Action: return "action";
        case Channel::Outcome: return "outcome";
        case Channel::Perception: return "perception";
        case Channel::Tool: return "tool";
        case Channel::Reasoning: return "reasoning";
        case Channel::Exchange: return "exchange";
    }
    return "dialogue";
}

std::optional<Channel> channel_from_name(std::string_view name) {
    for (Channel c : {Channel::Dialogue, Channel::Action, Channel::Outcome, Channel::Perception,
                      Channel::Tool, Channel::Reasoning, Channel::Exchange})
        if (channel_name(c) == name) return c;
    return std::nullopt;
}

Json TranscriptHeader::to_json() const {
    Json j;
    j["kind"] = "header";
    j["agent"] = agent;
    j["model"] = model;
    j["condition"] = condition;
    j["seed"] = seed;
    j["fixture"] = fixture_version;
    j["budget"] = tick_budget;
    j["latency"] = latency_ticks;
    j["episodic_preload"] = episodic_preload;
    return j;
}

TranscriptHeader TranscriptHeader::from_json(const Json& j) {
    if (j.value("kind", "") != "header")
        throw TranscriptError("first transcript line is not a header");
    TranscriptHeader h;
    h.agent = j.at("agent").get<std::string>();
    h.model = j.at("model").get<std::string>();
    h.condition = j.at("condition").get<std::string>();
    h.seed = j.at("seed").get<uint64_t>();
    h.fixture_version = j.at("fixture").get<std::string>();
    h.tick_budget = j.at("budget").get<int>();
    h.latency_ticks = j.at("latency").get<int>();
    h.episodic_preload = j.value("episodic_preload", Json::array());
    return h;
}

Json TranscriptEvent::to_json() const {
    Json j;
    j["tick"] = tick;
    j["channel"] = std::string(channel_name(channel));
    j["payload"] = payload;
    return j;
}

TranscriptEvent TranscriptEvent::from_json(const Json& j) {
    TranscriptEvent e;
    e.tick = j.at("tick").get<int>();
    auto c = channel_from_name(j.at("channel").get<std::string>());
    if (!c) throw TranscriptError("unknown channel '" + j.at("channel").get<std::string>() + "'");
    e.channel = *c;
    e.payload = j.at("payload");
    return e;
}

void TrialTranscript::append(int tick, Channel channel, Json payload) {
    if (!events_.empty() && tick < events_.back().tick)
        throw TranscriptError("event ticks must be non-decreasing");
    events_.push_back(TranscriptEvent{tick, channel, std::move(payload)});
}

std::vector<const TranscriptEvent*> TrialTranscript::channel_events(Channel c) const {
    std::vector<const TranscriptEvent*> out;
    for (const auto& e : events_)
        if (e.channel == c) out.push_back(&e);
    return out;
}

std::string TrialTranscript::serialize() const {
    std::string out = header_.to_json().dump();
    out += "\n";
    for (const auto& e : events_) {
        out += e.to_json().dump();
        out += "\n";
    }
    return out;
}

TrialTranscript TrialTranscript::parse(std::string_view text) {
    TrialTranscript t;
    std::istringstream in{std::string(text)};
    std::string line;
    bool have_header = false;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const std::exception& e) {
            throw TranscriptError("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!have_header) {
            t.header_ = TranscriptHeader::from_json(j);
            have_header = true;
        } else {
            TranscriptEvent ev = TranscriptEvent::from_json(j);
            if (!t.events_.empty() && ev.tick < t.events_.back().tick)
                throw TranscriptError("line " + std::to_string(line_no) +
                                      ": event ticks must be non-decreasing");
            t.events_.push_back(std::move(ev));
        }
    }
    if (!have_header) throw TranscriptError("empty transcript");
    return t;
}

void TrialTranscript::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw TranscriptError("cannot write " + path);
    out << serialize();
}

TrialTranscript TrialTranscript::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TranscriptError("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

void TrialTranscript::validate() const {
    std::set<int> open_actions;
    for (const auto& e : events_) {
        if (e.channel == Channel::Action) {
            int id = e.payload.value("id", 0);
            if (!open_actions.insert(id).second)
                throw TranscriptError("duplicate action id " + std::to_string(id));
        } else if (e.channel == Channel::Outcome) {
            int id = e.payload.value("id", 0);
            if (open_actions.erase(id) != 1)
                throw TranscriptError("outcome without matching action, id " + std::to_string(id));
        }
    }
    if (!open_actions.empty())
        throw TranscriptError("action without outcome, id " +
                              std::to_string(*open_actions.begin()));
}

struct TranscriptWriter::Impl {
    std::ofstream out;
};

TranscriptWriter::TranscriptWriter(std::string path, const TranscriptHeader& header)
    : impl_(std::make_unique<Impl>()) {
    impl_->out.open(path, std::ios::binary);
    if (!impl_->out) throw TranscriptError("cannot write " + path);
    impl_->out << header.to_json().dump() << "\n";
    impl_->out.flush();
}

TranscriptWriter::~TranscriptWriter() = default;

void TranscriptWriter::append(int tick, Channel channel, const Json& payload) {
    impl_->out << TranscriptEvent{tick, channel, payload}.to_json().dump() << "\n";
    impl_->out.flush();
}

}  // namespace deckhand
