#include "deckhand/knowledge.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <deque>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace deckhand {

namespace {

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

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

// CONCEPT(slot filler, slot filler)
FrameInstance parse_template(std::string_view s, int line_no) {
    auto open = s.find('(');
    FrameInstance frame;
    frame.id.index = 1;
    if (open == std::string_view::npos) {
        frame.id.concept_name = std::string(s);
        return frame;
    }
    if (s.back() != ')') throw ParseError("unclosed template '" + std::string(s) + "'", line_no, 1);
    frame.id.concept_name = std::string(s.substr(0, open));
    std::string_view body = s.substr(open + 1, s.size() - open - 2);
    size_t i = 0;
    while (i < body.size()) {
        size_t comma = body.find(',', i);
        std::string_view part =
            body.substr(i, comma == std::string_view::npos ? body.size() - i : comma - i);
        while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
        while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
        if (!part.empty()) {
            auto sp = part.find(' ');
            if (sp == std::string_view::npos)
                throw ParseError("template slot missing filler in '" + std::string(s) + "'",
                                 line_no, 1);
            std::string slot(part.substr(0, sp));
            std::string_view rest = part.substr(part.find_first_not_of(' ', sp));
            // reuse the frame notation's filler grammar via a one-slot document
            FrameDocument d = parse_frames("#T.1\n  " + slot + " " + std::string(rest) + "\n");
            frame.slots.push_back(d.frames[0].slots[0]);
        }
        if (comma == std::string_view::npos) break;
        i = comma + 1;
    }
    return frame;
}

std::string render_template(const FrameInstance& t) {
    if (t.slots.empty()) return t.id.concept_name;
    std::string out = t.id.concept_name + "(";
    for (size_t i = 0; i < t.slots.size(); ++i) {
        if (i) out += ", ";
        out += t.slots[i].name + " " + t.slots[i].value.render();
    }
    out += ")";
    return out;
}

Source parse_source(std::string_view s, int line_no) {
    if (s == "situation-model") return Source::SituationModel;
    if (s == "episodic-memory") return Source::EpisodicMemory;
    if (s == "ask-teammate") return Source::AskTeammate;
    throw ParseError("unknown requirement source '" + std::string(s) + "'", line_no, 1);
}

StepKind parse_step_kind(std::string_view s, int line_no) {
    if (s == "COMMAND") return StepKind::Command;
    if (s == "TOOL") return StepKind::Tool;
    if (s == "SPEECH") return StepKind::Speech;
    if (s == "SUBPLAN") return StepKind::SubPlan;
    throw ParseError("unknown step kind '" + std::string(s) + "'", line_no, 1);
}

// Variables a step makes available to later steps.
std::vector<std::string> step_provides(const Step& st) {
    if (st.kind == StepKind::Command && st.name == "SEARCH") return {"candidate"};
    if (st.kind == StepKind::Tool && st.name == "FIND-CAUSES") return {"hypotheses"};
    if (st.kind == StepKind::Tool && st.name == "SEARCHLOGS") return {"log-findings"};
    return {};
}

// Variables bound from the goal frame and situation when a plan is created.
const std::vector<std::string>& goal_bound_variables() {
    static const std::vector<std::string> vars = {"theme", "theme-type", "requester-location",
                                                  "hypothesis-components"};
    return vars;
}

}  // namespace

std::string Date::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

Date parse_date(std::string_view iso) {
    Date d;
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-')
        throw ParseError("malformed date '" + std::string(iso) + "'", 0, 0);
    auto num = [&](std::string_view part, int& out) {
        auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
        if (ec != std::errc{} || p != part.data() + part.size())
            throw ParseError("malformed date '" + std::string(iso) + "'", 0, 0);
    };
    num(iso.substr(0, 4), d.year);
    num(iso.substr(5, 2), d.month);
    num(iso.substr(8, 2), d.day);
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31)
        throw ParseError("date out of range '" + std::string(iso) + "'", 0, 0);
    return d;
}

int months_between(const Date& from, const Date& to) {
    int months = (to.year - from.year) * 12 + (to.month - from.month);
    if (to.day < from.day) --months;
    return months;
}

std::string_view source_name(Source s) {
    switch (s) {
        case Source::SituationModel: return "situation-model";
        case Source::EpisodicMemory: return "episodic-memory";
        case Source::AskTeammate: return "ask-teammate";
    }
    return "situation-model";
}

std::string_view step_kind_name(StepKind k) {
    switch (k) {
        case StepKind::Command: return "COMMAND";
        case StepKind::Tool: return "TOOL";
        case StepKind::Speech: return "SPEECH";
        case StepKind::SubPlan: return "SUBPLAN";
    }
    return "COMMAND";
}

void EpisodicStore::append(EpisodicRecord rec) {
    if (!records_.empty() && rec.timestamp < records_.back().timestamp)
        throw KnowledgeError("episodic timestamps must be non-decreasing");
    records_.push_back(std::move(rec));
}

std::optional<EpisodicRecord> EpisodicStore::lookup(const FrameInstance& pattern) const {
    const EpisodicRecord* best = nullptr;
    for (const auto& rec : records_) {
        if (rec.content.id.concept_name != pattern.id.concept_name) continue;
        bool ok = true;
        for (const auto& slot : pattern.slots) {
            const Filler* have = rec.content.find(slot.name);
            if (!have || !filler_satisfies(*have, slot.value)) {
                ok = false;
                break;
            }
        }
        if (ok && (!best || rec.timestamp >= best->timestamp)) best = &rec;
    }
    if (!best) return std::nullopt;
    return *best;
}

const Concept* KnowledgeBase::find_concept(std::string_view name) const {
    for (const auto& c : concepts_)
        if (c.name == name) return &c;
    return nullptr;
}

bool KnowledgeBase::is_a(std::string_view concept_name, std::string_view ancestor) const {
    if (concept_name == ancestor) return true;
    const Concept* c = find_concept(concept_name);
    if (!c) return false;
    for (const auto& p : c->parents)
        if (is_a(p, ancestor)) return true;
    return false;
}

std::vector<const CauseLink*> KnowledgeBase::find_causes(std::string_view symptom,
                                                         std::string_view theme,
                                                         const CauseQuery& q) const {
    const Concept* c = find_concept(symptom);
    if (!c) throw KnowledgeError("unknown symptom concept '" + std::string(symptom) + "'");
    std::vector<const CauseLink*> out;
    for (const auto& link : c->causal_links) {
        if (link.applicability) {
            bool admitted = q.inherit_isa ? is_a(theme, *link.applicability)
                                          : (*link.applicability == theme);
            if (!admitted) continue;
        }
        out.push_back(&link);
    }
    return out;
}

std::vector<const CauseLink*> KnowledgeBase::find_causes_transitive(std::string_view symptom,
                                                                    std::string_view theme) const {
    std::vector<const CauseLink*> out;
    std::unordered_set<std::string> seen_links;
    std::unordered_set<std::string> visited;
    std::deque<std::string> queue;
    queue.emplace_back(symptom);
    visited.emplace(symptom);
    bool first_level = true;
    while (!queue.empty()) {
        std::string current = std::move(queue.front());
        queue.pop_front();
        const Concept* c = find_concept(current);
        if (!c) {
            if (first_level)
                throw KnowledgeError("unknown symptom concept '" + current + "'");
            continue;
        }
        for (const auto& link : c->causal_links) {
            // applicability restricts only the queried symptom's own links
            if (first_level && link.applicability && *link.applicability != theme) continue;
            if (!seen_links.insert(link.id).second) continue;
            out.push_back(&link);
            const std::string& next = link.cause_template.id.concept_name;
            if (visited.insert(next).second) queue.push_back(next);
        }
        first_level = false;
    }
    return out;
}

const Script* KnowledgeBase::script_for_goal(std::string_view goal_concept) const {
    for (const auto& s : scripts_)
        if (!s.is_metascript && s.goal_concept == goal_concept) return &s;
    return nullptr;
}

const Script* KnowledgeBase::metascript_for(std::string_view requirement_subject) const {
    for (const auto& s : scripts_)
        if (s.is_metascript && s.metascript_trigger == requirement_subject) return &s;
    return nullptr;
}

const Script* KnowledgeBase::script(std::string_view id) const {
    for (const auto& s : scripts_)
        if (s.id == id) return &s;
    return nullptr;
}

std::vector<ServiceLogEntry> KnowledgeBase::search_logs(std::string_view query) const {
    std::string q = to_lower(query);
    std::vector<ServiceLogEntry> out;
    for (const auto& e : log_) {
        if (q.empty() || to_lower(e.component).find(q) != std::string::npos ||
            to_lower(e.action).find(q) != std::string::npos ||
            to_lower(e.note).find(q) != std::string::npos)
            out.push_back(e);
    }
    return out;
}

KnowledgeBase KnowledgeBase::load(std::string_view ontology_text, std::string_view scripts_text,
                                  std::string_view log_text) {
    KnowledgeBase kb;

    // --- ontology ---
    {
        Concept* current = nullptr;
        int line_no = 0;
        std::istringstream in{std::string(ontology_text)};
        std::string raw;
        while (std::getline(in, raw)) {
            ++line_no;
            std::string line = strip_comment(raw);
            if (line.find_first_not_of(" \t") == std::string::npos) continue;
            bool indented = line[0] == ' ' || line[0] == '\t';
            std::string body = line.substr(line.find_first_not_of(" \t"));
            if (!indented) {
                if (body[0] != '@')
                    throw ParseError("expected concept header '@NAME'", line_no, 1);
                std::string name = body.substr(1);
                for (const auto& c : kb.concepts_)
                    if (c.name == name)
                        throw ParseError("duplicate concept '" + name + "'", line_no, 1);
                kb.concepts_.push_back(Concept{name, {}, {}, {}, std::nullopt});
                current = &kb.concepts_.back();
                continue;
            }
            if (!current) throw ParseError("body line before concept header", line_no, 1);
            auto toks = split_ws(body);
            const std::string& key = toks[0];
            if (key == "IS-A") {
                current->parents.assign(toks.begin() + 1, toks.end());
            } else if (key == "SLOT") {
                if (toks.size() < 3) throw ParseError("SLOT needs name and constraint", line_no, 1);
                current->slot_defs.push_back(SlotDef{toks[1], toks[2]});
            } else if (key == "TRIGGERS-GOAL") {
                if (toks.size() != 2) throw ParseError("TRIGGERS-GOAL needs one goal", line_no, 1);
                current->triggers_goal = toks[1];
            } else if (key == "CAUSED-BY") {
                std::string rest = body.substr(body.find_first_not_of(" \t", key.size()));
                std::optional<std::string> applicability;
                if (auto at = rest.find(" IF-THEME "); at != std::string::npos) {
                    applicability = rest.substr(at + 10);
                    rest = rest.substr(0, at);
                }
                CauseLink link;
                link.symptom = current->name;
                link.cause_template = parse_template(rest, line_no);
                link.applicability = std::move(applicability);
                link.id = current->name + "#" + std::to_string(current->causal_links.size() + 1);
                current->causal_links.push_back(std::move(link));
            } else {
                throw ParseError("unknown concept key '" + key + "'", line_no, 1);
            }
        }
    }

    // --- scripts ---
    {
        Script* current = nullptr;
        int line_no = 0;
        std::istringstream in{std::string(scripts_text)};
        std::string raw;
        while (std::getline(in, raw)) {
            ++line_no;
            std::string line = strip_comment(raw);
            if (line.find_first_not_of(" \t") == std::string::npos) continue;
            bool indented = line[0] == ' ' || line[0] == '\t';
            std::string body = line.substr(line.find_first_not_of(" \t"));
            auto toks = split_ws(body);
            if (!indented) {
                if (toks.size() != 2 || (toks[0] != "SCRIPT" && toks[0] != "METASCRIPT"))
                    throw ParseError("expected SCRIPT or METASCRIPT header", line_no, 1);
                kb.scripts_.push_back(Script{});
                current = &kb.scripts_.back();
                current->id = toks[1];
                current->is_metascript = toks[0] == "METASCRIPT";
                continue;
            }
            if (!current) throw ParseError("body line before script header", line_no, 1);
            const std::string& key = toks[0];
            if (key == "GOAL") {
                if (toks.size() != 2) throw ParseError("GOAL needs one concept", line_no, 1);
                current->goal_concept = toks[1];
            } else if (key == "RESOLVES") {
                if (toks.size() != 2) throw ParseError("RESOLVES needs one subject", line_no, 1);
                current->metascript_trigger = toks[1];
            } else if (key == "PRECONDITION") {
                auto from = std::find(toks.begin(), toks.end(), "FROM");
                if (from == toks.end() || from == toks.begin() + 1 || from + 1 == toks.end())
                    throw ParseError("PRECONDITION needs `subject FROM source...`", line_no, 1);
                KnowledgeRequirement req;
                req.subject = toks[1];
                for (auto it = from + 1; it != toks.end(); ++it)
                    req.resolution_order.push_back(parse_source(*it, line_no));
                for (size_t i = 0; i < req.resolution_order.size(); ++i)
                    if (req.resolution_order[i] == Source::AskTeammate &&
                        i + 1 != req.resolution_order.size())
                        throw ParseError("ask-teammate must be the last source", line_no, 1);
                current->preconditions.push_back(std::move(req));
            } else if (key == "STEP") {
                if (toks.size() < 3) throw ParseError("STEP needs kind and name", line_no, 1);
                Step st;
                st.kind = parse_step_kind(toks[1], line_no);
                st.name = toks[2];
                for (size_t i = 3; i < toks.size(); ++i) {
                    auto eq = toks[i].find('=');
                    if (eq == std::string::npos)
                        throw ParseError("step parameter must be key=value", line_no, 1);
                    st.params.emplace_back(toks[i].substr(0, eq), toks[i].substr(eq + 1));
                }
                current->steps.push_back(std::move(st));
            } else {
                throw ParseError("unknown script key '" + key + "'", line_no, 1);
            }
        }
    }

    // --- service log ---
    {
        int line_no = 0;
        std::istringstream in{std::string(log_text)};
        std::string raw;
        while (std::getline(in, raw)) {
            ++line_no;
            if (!raw.empty() && raw.back() == '\r') raw.pop_back();
            if (raw.empty()) continue;
            std::vector<std::string> cols;
            size_t pos = 0;
            while (true) {
                size_t tab = raw.find('\t', pos);
                cols.push_back(raw.substr(pos, tab == std::string::npos ? std::string::npos
                                                                        : tab - pos));
                if (tab == std::string::npos) break;
                pos = tab + 1;
            }
            if (cols.size() != 4)
                throw ParseError("service log line needs 4 tab-separated fields", line_no, 1);
            kb.log_.push_back(ServiceLogEntry{parse_date(cols[0]), cols[1], cols[2], cols[3]});
        }
        std::stable_sort(kb.log_.begin(), kb.log_.end(),
                         [](const auto& a, const auto& b) { return a.date < b.date; });
    }

    kb.validate();
    return kb;
}

void KnowledgeBase::validate() const {
    // every parent and cause-template concept resolves
    for (const auto& c : concepts_) {
        for (const auto& p : c.parents)
            if (!has_concept(p))
                throw KnowledgeError("concept '" + c.name + "' has unknown parent '" + p + "'");
        for (const auto& link : c.causal_links) {
            if (!has_concept(link.cause_template.id.concept_name))
                throw KnowledgeError("cause link " + link.id + " names unknown concept '" +
                                     link.cause_template.id.concept_name + "'");
            if (link.applicability && !has_concept(*link.applicability))
                throw KnowledgeError("cause link " + link.id + " restricts to unknown concept '" +
                                     *link.applicability + "'");
            for (const auto& slot : link.cause_template.slots)
                if (const auto* cr = slot.value.get<ConceptRef>(); cr && !has_concept(cr->concept_name))
                    throw KnowledgeError("cause link " + link.id + " names unknown concept '@" +
                                         cr->concept_name + "'");
        }
    }

    // IS-A acyclicity (colors: 0 unvisited, 1 on stack, 2 done)
    std::unordered_map<std::string, int> color;
    auto visit = [&](auto&& self, const std::string& name) -> void {
        int& c = color[name];
        if (c == 1) throw KnowledgeError("IS-A cycle through '" + name + "'");
        if (c == 2) return;
        c = 1;
        if (const Concept* cp = find_concept(name))
            for (const auto& p : cp->parents) self(self, p);
        c = 2;
    };
    for (const auto& c : concepts_) visit(visit, c.name);

    // scripts: goal uniqueness, one metascript per requirement subject
    std::unordered_set<std::string> goals, triggers, ids;
    for (const auto& s : scripts_) {
        if (!ids.insert(s.id).second) throw KnowledgeError("duplicate script id '" + s.id + "'");
        if (s.is_metascript) {
            if (!s.metascript_trigger)
                throw KnowledgeError("metascript '" + s.id + "' missing RESOLVES");
            if (!triggers.insert(*s.metascript_trigger).second)
                throw KnowledgeError("multiple metascripts resolve '" + *s.metascript_trigger +
                                     "'");
        } else {
            if (s.goal_concept.empty())
                throw KnowledgeError("script '" + s.id + "' missing GOAL");
            if (!goals.insert(s.goal_concept).second)
                throw KnowledgeError("multiple scripts for goal '" + s.goal_concept + "'");
            if (!has_concept(s.goal_concept))
                throw KnowledgeError("script '" + s.id + "' has unknown goal concept '" +
                                     s.goal_concept + "'");
        }
        for (const auto& req : s.preconditions)
            if (req.resolution_order.empty())
                throw KnowledgeError("empty resolution order in '" + s.id + "'");

        // step variables must be bound by the goal, preconditions, or prior steps
        std::unordered_set<std::string> bound(goal_bound_variables().begin(),
                                              goal_bound_variables().end());
        for (const auto& req : s.preconditions) bound.insert(req.subject);
        for (const auto& st : s.steps) {
            for (const auto& [key, value] : st.params) {
                if (!value.empty() && value[0] == '$' && !bound.count(value.substr(1)))
                    throw KnowledgeError("script '" + s.id + "' step " + st.name +
                                         " uses unbound variable " + value);
            }
            for (const auto& v : step_provides(st)) bound.insert(v);
        }
    }
}

KnowledgeTexts render_knowledge(const KnowledgeBase& kb) {
    KnowledgeTexts out;
    for (const auto& c : kb.concepts()) {
        out.ontology += "@" + c.name + "\n";
        if (!c.parents.empty()) {
            out.ontology += "  IS-A";
            for (const auto& p : c.parents) out.ontology += " " + p;
            out.ontology += "\n";
        }
        for (const auto& sd : c.slot_defs)
            out.ontology += "  SLOT " + sd.slot + " " + sd.constraint + "\n";
        if (c.triggers_goal) out.ontology += "  TRIGGERS-GOAL " + *c.triggers_goal + "\n";
        for (const auto& link : c.causal_links) {
            out.ontology += "  CAUSED-BY " + render_template(link.cause_template);
            if (link.applicability) out.ontology += " IF-THEME " + *link.applicability;
            out.ontology += "\n";
        }
    }
    for (const auto& s : kb.scripts()) {
        out.scripts += (s.is_metascript ? "METASCRIPT " : "SCRIPT ") + s.id + "\n";
        if (!s.goal_concept.empty()) out.scripts += "  GOAL " + s.goal_concept + "\n";
        if (s.metascript_trigger) out.scripts += "  RESOLVES " + *s.metascript_trigger + "\n";
        for (const auto& req : s.preconditions) {
            out.scripts += "  PRECONDITION " + req.subject + " FROM";
            for (auto src : req.resolution_order)
                out.scripts += " " + std::string(source_name(src));
            out.scripts += "\n";
        }
        for (const auto& st : s.steps) {
            out.scripts += "  STEP " + std::string(step_kind_name(st.kind)) + " " + st.name;
            for (const auto& [k, v] : st.params) out.scripts += " " + k + "=" + v;
            out.scripts += "\n";
        }
    }
    for (const auto& e : kb.log())
        out.log += e.date.iso() + "\t" + e.component + "\t" + e.action + "\t" + e.note + "\n";
    return out;
}

}  // namespace deckhand
