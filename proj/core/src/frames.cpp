#include "deckhand/frames.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace deckhand {

namespace {

bool is_concept_char(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-';
}

bool is_symbol_like(std::string_view s) {
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
    });
}

bool parse_double(std::string_view s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

// `#CONCEPT.n` / `->CONCEPT.n` / bare `CONCEPT.n`
bool parse_instance_id(std::string_view s, InstanceId& out) {
    auto dot = s.rfind('.');
    if (dot == std::string_view::npos || dot == 0 || dot + 1 >= s.size()) return false;
    std::string_view concept_name = s.substr(0, dot);
    std::string_view idx = s.substr(dot + 1);
    if (!std::all_of(idx.begin(), idx.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        return false;
    if (concept_name.empty() || !std::isalpha(static_cast<unsigned char>(concept_name[0]))) return false;
    int n = 0;
    auto [ptr, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), n);
    if (ec != std::errc{} || ptr != idx.data() + idx.size()) return false;
    out.concept_name = std::string(concept_name);
    out.index = n;
    return true;
}

struct Line {
    int number = 0;
    int indent = 0;
    std::string text;  // markup/comments stripped, trimmed right
};

// Strips comments and presentation markup from one raw line, preserving
// quoted strings verbatim. Returns false when the line opens a quoted string
// it does not close (multi-line string continues on the following line).
bool strip_line(std::string_view raw, std::string& out, bool& in_quote) {
    out.clear();
    size_t i = 0;
    int markup_depth = 0;
    while (i < raw.size()) {
        char c = raw[i];
        if (in_quote) {
            out.push_back(c);
            if (c == '"') in_quote = false;
            ++i;
            continue;
        }
        if (c == '"') {
            in_quote = true;
            out.push_back(c);
            ++i;
            continue;
        }
        if (raw.compare(i, 2, "//") == 0) break;
        if (raw.compare(i, 6, "\\hfill") == 0) break;
        if (raw.compare(i, 8, "\\textbf{") == 0) {
            ++markup_depth;
            i += 8;
            continue;
        }
        if (raw.compare(i, 11, "\\textcolor{") == 0) {
            // \textcolor{<name>}{ ... }
            size_t close = raw.find('}', i + 11);
            if (close != std::string_view::npos && close + 1 < raw.size() &&
                raw[close + 1] == '{') {
                ++markup_depth;
                i = close + 2;
                continue;
            }
        }
        if (c == '}' && markup_depth > 0) {
            --markup_depth;
            ++i;
            continue;
        }
        out.push_back(c);
        ++i;
    }
    while (!out.empty() && (out.back() == ' ' || out.back() == '\t' || out.back() == '\r'))
        out.pop_back();
    return !in_quote;
}

Filler parse_filler(std::string_view s, int line_no, int col) {
    if (s == "?") return Filler{Wildcard{}};
    if (s.size() >= 2 && s.front() == '"') {
        if (s.back() != '"' || s.size() < 2)
            throw ParseError("unterminated quoted text", line_no, col);
        return make_text(std::string(s.substr(1, s.size() - 2)));
    }
    if (s[0] == '#') {
        InstanceId id;
        if (!parse_instance_id(s.substr(1), id))
            throw ParseError("malformed instance reference '" + std::string(s) + "'", line_no, col);
        return Filler{InstanceRef{id}};
    }
    if (s.size() > 2 && s[0] == '-' && s[1] == '>') {
        InstanceId id;
        if (!parse_instance_id(s.substr(2), id))
            throw ParseError("malformed coreference '" + std::string(s) + "'", line_no, col);
        return Filler{CoRef{id}};
    }
    if (s[0] == '@') {
        std::string_view name = s.substr(1);
        if (name.empty() || !std::all_of(name.begin(), name.end(), is_concept_char))
            throw ParseError("malformed concept reference '" + std::string(s) + "'", line_no, col);
        return make_concept_ref(std::string(name));
    }
    if (auto sep = s.find("<>"); sep != std::string_view::npos) {
        double lo = 0, hi = 0;
        if (parse_double(s.substr(0, sep), lo) && parse_double(s.substr(sep + 2), hi)) {
            if (lo > hi) throw ParseError("numeric range lo exceeds hi", line_no, col);
            return make_range(lo, hi);
        }
    }
    for (auto [tok, op] : {std::pair{std::string_view("<="), CompareOp::LessEq},
                           {std::string_view(">="), CompareOp::GreaterEq},
                           {std::string_view("<"), CompareOp::Less},
                           {std::string_view(">"), CompareOp::Greater}}) {
        if (s.substr(0, tok.size()) == tok) {
            double v = 0;
            if (parse_double(s.substr(tok.size()), v)) return Filler{Comparison{op, v}};
        }
    }
    if (double v = 0; parse_double(s, v)) return make_number(v);
    if (is_symbol_like(s)) return make_text(std::string(s));
    throw ParseError("unrecognized filler '" + std::string(s) + "'", line_no, col);
}

// Collapses whitespace runs that contain a newline down to one space; quoted
// strings may continue across lines in source listings.
std::string normalize_multiline(std::string_view s) {
    std::string out;
    size_t i = 0;
    while (i < s.size()) {
        if (s[i] == '\n') {
            while (!out.empty() && (out.back() == ' ' || out.back() == '\t')) out.pop_back();
            out.push_back(' ');
            ++i;
            while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
            continue;
        }
        out.push_back(s[i]);
        ++i;
    }
    return out;
}

}  // namespace

std::string InstanceId::str() const { return concept_name + "." + std::to_string(index); }

std::string_view compare_op_token(CompareOp op) {
    switch (op) {
        case CompareOp::Less: return "<";
        case CompareOp::LessEq: return "<=";
        case CompareOp::Greater: return ">";
        case CompareOp::GreaterEq: return ">=";
    }
    return "<";
}

bool Comparison::admits(double v) const {
    switch (op) {
        case CompareOp::Less: return v < value;
        case CompareOp::LessEq: return v <= value;
        case CompareOp::Greater: return v > value;
        case CompareOp::GreaterEq: return v >= value;
    }
    return false;
}

std::string_view provenance_name(Provenance p) {
    switch (p) {
        case Provenance::Situation: return "situation";
        case Provenance::Tmr: return "tmr";
        case Provenance::Vmr: return "vmr";
        case Provenance::Gmr: return "gmr";
    }
    return "situation";
}

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string Filler::render() const {
    struct Visitor {
        std::string operator()(const InstanceRef& r) const { return "#" + r.target.str(); }
        std::string operator()(const CoRef& r) const { return "->" + r.target.str(); }
        std::string operator()(const ConceptRef& r) const { return "@" + r.concept_name; }
        std::string operator()(const NumericRange& r) const {
            return format_number(r.lo) + "<>" + format_number(r.hi);
        }
        std::string operator()(const Comparison& c) const {
            return std::string(compare_op_token(c.op)) + format_number(c.value);
        }
        std::string operator()(const Number& n) const { return format_number(n.value); }
        std::string operator()(const Text& t) const {
            if (is_symbol_like(t.value)) {
                // bare form must not re-lex as another filler kind
                double d;
                if (t.value != "?" && !parse_double(t.value, d)) return t.value;
            }
            return "\"" + t.value + "\"";
        }
        std::string operator()(const Directive& d) const { return "\"" + d.text + "\""; }
        std::string operator()(const Wildcard&) const { return "?"; }
    };
    return std::visit(Visitor{}, value);
}

Filler make_text(std::string s) { return Filler{Text{std::move(s)}}; }
Filler make_number(double v) { return Filler{Number{v}}; }
Filler make_instance_ref(std::string concept_name, int index) {
    return Filler{InstanceRef{InstanceId{std::move(concept_name), index}}};
}
Filler make_coref(std::string concept_name, int index) {
    return Filler{CoRef{InstanceId{std::move(concept_name), index}}};
}
Filler make_concept_ref(std::string concept_name) { return Filler{ConceptRef{std::move(concept_name)}}; }
Filler make_range(double lo, double hi) { return Filler{NumericRange{lo, hi}}; }

const Filler* FrameInstance::find(std::string_view slot_name) const {
    for (const auto& s : slots)
        if (s.name == slot_name) return &s.value;
    return nullptr;
}

std::vector<const Filler*> FrameInstance::all(std::string_view slot_name) const {
    std::vector<const Filler*> out;
    for (const auto& s : slots)
        if (s.name == slot_name) out.push_back(&s.value);
    return out;
}

void FrameInstance::set(std::string name, Filler value) {
    for (auto& s : slots) {
        if (s.name == name) {
            s.value = std::move(value);
            return;
        }
    }
    slots.push_back(Slot{std::move(name), std::move(value)});
}

const FrameInstance* FrameDocument::find(const InstanceId& id) const {
    for (const auto& f : frames)
        if (f.id == id) return &f;
    return nullptr;
}

FrameInstance* FrameDocument::find(const InstanceId& id) {
    for (auto& f : frames)
        if (f.id == id) return &f;
    return nullptr;
}

ParseError::ParseError(std::string msg, int line_, int col_)
    : std::runtime_error("parse error at " + std::to_string(line_) + ":" + std::to_string(col_) +
                         ": " + std::move(msg)),
      line(line_),
      col(col_) {}

FrameDocument parse_frames(std::string_view text, const ParseOptions& opts) {
    // Pass 1: physical lines -> logical lines (markup stripped, multi-line
    // quoted strings joined).
    std::vector<Line> lines;
    {
        std::string stripped;
        bool in_quote = false;
        std::string pending;
        int pending_line = 0;
        int line_no = 0;
        size_t pos = 0;
        while (pos <= text.size()) {
            size_t eol = text.find('\n', pos);
            std::string_view raw = text.substr(
                pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
            ++line_no;
            bool closed = strip_line(raw, stripped, in_quote);
            if (!pending.empty() || !closed) {
                if (!pending.empty()) pending += "\n";
                pending += stripped;
                if (closed) {
                    std::string joined = normalize_multiline(pending);
                    pending.clear();
                    int indent = 0;
                    size_t j = 0;
                    while (j < joined.size() && (joined[j] == ' ' || joined[j] == '\t')) {
                        indent += joined[j] == '\t' ? 4 : 1;
                        ++j;
                    }
                    if (j < joined.size())
                        lines.push_back(Line{pending_line, indent, joined.substr(j)});
                } else if (pending.size() == stripped.size()) {
                    pending_line = line_no;
                }
            } else {
                int indent = 0;
                size_t j = 0;
                while (j < stripped.size() && (stripped[j] == ' ' || stripped[j] == '\t')) {
                    indent += stripped[j] == '\t' ? 4 : 1;
                    ++j;
                }
                if (j < stripped.size()) lines.push_back(Line{line_no, indent, stripped.substr(j)});
            }
            if (eol == std::string_view::npos) break;
            pos = eol + 1;
        }
        if (in_quote || !pending.empty())
            throw ParseError("unterminated quoted text at end of input", line_no, 0);
    }

    // Pass 2: build frames.
    FrameDocument doc;
    FrameInstance* current = nullptr;
    for (const auto& ln : lines) {
        const std::string& t = ln.text;
        bool single_token = t.find(' ') == std::string::npos && t.find('\t') == std::string::npos;

        if (single_token && t[0] == '#') {
            InstanceId id;
            if (!parse_instance_id(std::string_view(t).substr(1), id))
                throw ParseError("malformed frame header '" + t + "'", ln.number, ln.indent + 1);
            if (doc.has(id))
                throw ParseError("duplicate instance id '" + id.str() + "'", ln.number,
                                 ln.indent + 1);
            doc.frames.push_back(FrameInstance{id, {}, Provenance::Situation, 0});
            current = &doc.frames.back();
            continue;
        }
        if (single_token && !doc.label && doc.frames.empty()) {
            InstanceId label_id;
            if (parse_instance_id(t, label_id)) {
                doc.label = t;
                continue;
            }
        }
        if (current == nullptr)
            throw ParseError("slot line before any frame header: '" + t + "'", ln.number,
                             ln.indent + 1);

        // Slot line: `name filler` or directive `*name "..."`.
        size_t sp = t.find_first_of(" \t");
        if (sp == std::string::npos)
            throw ParseError("slot line missing filler: '" + t + "'", ln.number, ln.indent + 1);
        std::string name = t.substr(0, sp);
        size_t vpos = t.find_first_not_of(" \t", sp);
        std::string_view rest = std::string_view(t).substr(vpos);
        if (name[0] == '*') {
            if (rest.size() < 2 || rest.front() != '"' || rest.back() != '"')
                throw ParseError("directive requires quoted text", ln.number,
                                 static_cast<int>(ln.indent + vpos + 1));
            current->slots.push_back(
                Slot{name, Filler{Directive{std::string(rest.substr(1, rest.size() - 2))}}});
        } else {
            current->slots.push_back(Slot{
                name, parse_filler(rest, ln.number, static_cast<int>(ln.indent + vpos + 1))});
        }
    }

    if (opts.strict_refs) {
        auto known = [&](const InstanceId& id) {
            if (doc.has(id)) return true;
            return std::find(opts.known_instances.begin(), opts.known_instances.end(), id) !=
                   opts.known_instances.end();
        };
        for (const auto& f : doc.frames)
            for (const auto& s : f.slots)
                if (const auto* r = s.value.get<InstanceRef>(); r && !known(r->target))
                    throw ParseError("dangling instance reference '#" + r->target.str() + "'", 0,
                                     0);
    }
    return doc;
}

std::string render_frames(const FrameDocument& doc) {
    std::string out;
    if (doc.label) {
        out += *doc.label;
        out += "\n";
    }
    for (const auto& f : doc.frames) {
        out += "#" + f.id.str() + "\n";
        for (const auto& s : f.slots) {
            out += "  " + s.name + " " + s.value.render() + "\n";
        }
    }
    return out;
}

bool equal_modulo_indices(const FrameDocument& a, const FrameDocument& b) {
    auto renumber = [](const FrameDocument& d) {
        FrameDocument out = d;
        std::map<std::pair<std::string, int>, int> next_index_map;
        std::unordered_map<std::string, int> counters;
        auto remap = [&](InstanceId& id) {
            auto key = std::make_pair(id.concept_name, id.index);
            auto it = next_index_map.find(key);
            if (it == next_index_map.end())
                it = next_index_map.emplace(key, ++counters[id.concept_name]).first;
            id.index = it->second;
        };
        for (auto& f : out.frames) {
            remap(f.id);
            for (auto& s : f.slots) {
                if (auto* r = std::get_if<InstanceRef>(&s.value.value)) remap(r->target);
            }
        }
        return out;
    };
    FrameDocument ra = renumber(a);
    FrameDocument rb = renumber(b);
    if (ra.frames.size() != rb.frames.size()) return false;
    for (size_t i = 0; i < ra.frames.size(); ++i)
        if (!(ra.frames[i] == rb.frames[i])) return false;
    return true;
}

bool filler_satisfies(const Filler& value, const Filler& constraint) {
    if (constraint.is<Wildcard>()) return true;
    if (const auto* r = constraint.get<NumericRange>()) {
        if (const auto* n = value.get<Number>()) return r->contains(n->value);
        if (const auto* vr = value.get<NumericRange>())
            return r->contains(vr->lo) && r->contains(vr->hi);
        return false;
    }
    if (const auto* c = constraint.get<Comparison>()) {
        if (const auto* n = value.get<Number>()) return c->admits(n->value);
        return false;
    }
    return value == constraint;
}

}  // namespace deckhand
