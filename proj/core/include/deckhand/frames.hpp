#pragma once
// Frame-instance data model and the canonical frame notation.
//
// Notation, one frame per block:
//
//   #CONCEPT.n                     frame header (a lone token on its line)
//     slot-name filler             slot lines, canonically indented two spaces
//
// Fillers: #CONCEPT.n (instance ref), ->CONCEPT.n (coref into the situation
// model), @CONCEPT (uninstantiated concept), lo<>hi (numeric range), <0.7
// (comparison), bare numbers, bare symbols, "quoted text", ? (wildcard), and
// *take-this-action "..." directive lines. Comments run from // to end of
// line. A document may open with a bare label line such as `Plan.1`.
//
// The parser additionally tolerates presentation markup that frame listings
// are sometimes wrapped in when quoted elsewhere: \textbf{...} /
// \textcolor{...}{...} around tokens and \hfill trailing annotations.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace deckhand {

// #CONCEPT.n
struct InstanceId {
    std::string concept_name;
    int index = 1;

    bool operator==(const InstanceId&) const = default;
    std::string str() const;
};

enum class CompareOp { Less, LessEq, Greater, GreaterEq };

std::string_view compare_op_token(CompareOp op);

struct Filler;

struct InstanceRef { InstanceId target; bool operator==(const InstanceRef&) const = default; };
struct CoRef       { InstanceId target; bool operator==(const CoRef&) const = default; };
struct ConceptRef  { std::string concept_name; bool operator==(const ConceptRef&) const = default; };
struct NumericRange {
    double lo = 0, hi = 0;
    bool operator==(const NumericRange&) const = default;
    bool contains(double v) const { return v >= lo && v <= hi; }
};
struct Comparison {
    CompareOp op = CompareOp::Less;
    double value = 0;
    bool operator==(const Comparison&) const = default;
    bool admits(double v) const;
};
struct Number    { double value = 0; bool operator==(const Number&) const = default; };
struct Text      { std::string value; bool operator==(const Text&) const = default; };
struct Directive { std::string text; bool operator==(const Directive&) const = default; };
struct Wildcard  { bool operator==(const Wildcard&) const = default; };

struct Filler {
    using Variant = std::variant<InstanceRef, CoRef, ConceptRef, NumericRange,
                                 Comparison, Number, Text, Directive, Wildcard>;
    Variant value;

    Filler() : value(Wildcard{}) {}
    Filler(Variant v) : value(std::move(v)) {}

    template <class T> const T* get() const { return std::get_if<T>(&value); }
    template <class T> bool is() const { return std::holds_alternative<T>(value); }
    bool operator==(const Filler&) const = default;

    std::string render() const;
};

Filler make_text(std::string s);
Filler make_number(double v);
Filler make_instance_ref(std::string concept_name, int index);
Filler make_coref(std::string concept_name, int index);
Filler make_concept_ref(std::string concept_name);
Filler make_range(double lo, double hi);

enum class Provenance { Situation, Tmr, Vmr, Gmr };

std::string_view provenance_name(Provenance p);

struct Slot {
    std::string name;
    Filler value;
    bool operator==(const Slot&) const = default;
};

// One frame instance. Slots are an ordered list; duplicate names are
// permitted (multi-valued slots render as repeated lines). Equality is
// structural over id and slots; provenance and tick are carrier metadata the
// notation does not encode.
struct FrameInstance {
    InstanceId id;
    std::vector<Slot> slots;
    Provenance provenance = Provenance::Situation;
    int tick = 0;

    const Filler* find(std::string_view slot_name) const;
    std::vector<const Filler*> all(std::string_view slot_name) const;
    void set(std::string name, Filler value);  // replaces first match or appends

    friend bool operator==(const FrameInstance& a, const FrameInstance& b) {
        return a.id == b.id && a.slots == b.slots;
    }
};

struct FrameDocument {
    std::optional<std::string> label;  // e.g. "Plan.1"
    std::vector<FrameInstance> frames;

    const FrameInstance* find(const InstanceId& id) const;
    FrameInstance* find(const InstanceId& id);
    bool has(const InstanceId& id) const { return find(id) != nullptr; }
    bool empty() const { return frames.empty() && !label; }

    bool operator==(const FrameDocument&) const = default;
};

struct ParseError : std::runtime_error {
    int line = 0;
    int col = 0;
    ParseError(std::string msg, int line_, int col_);
};

struct ParseOptions {
    // When set, an InstanceRef that resolves neither to a frame in the
    // document nor to an id in `known_instances` is a dangling-reference
    // error. The lenient default keeps such refs symbolic, the way corefs
    // are; speech-act participants are routinely defined only by the
    // surrounding situation.
    bool strict_refs = false;
    std::vector<InstanceId> known_instances;
};

FrameDocument parse_frames(std::string_view text, const ParseOptions& opts = {});
std::string render_frames(const FrameDocument& doc);

// Structural equality after renumbering instance indices in first-appearance
// order (headers and refs alike). Lets two documents that differ only in
// instance numbering compare equal.
bool equal_modulo_indices(const FrameDocument& a, const FrameDocument& b);

// True when `value` satisfies `constraint`: wildcards admit anything,
// ranges/comparisons admit numbers, everything else is equality.
bool filler_satisfies(const Filler& value, const Filler& constraint);

// Format a double the way the notation renders it (shortest round-trip).
std::string format_number(double v);

}  // namespace deckhand
