#pragma once
// Template-based mapping between the scenario's utterances and frame
// documents. Understanding matches anchored, case-insensitive patterns with
// typed slot captures; generation renders a frame document's root concept
// through a fixed surface pattern. The canonical template set covers the
// M1..M9 utterance family and close paraphrases.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "deckhand/frames.hpp"
#include "deckhand/knowledge.hpp"

namespace deckhand {

// Minimal view of the situation model the templates need: unique-instance
// lookup for coreference resolution.
struct CorefScope {
    // instance indices present for a concept, in insertion order
    std::function<std::vector<int>(std::string_view concept_name)> instances_of;
};

enum class CaptureKind {
    Concept,  // token names an ontology concept (checked against a type)
    AgeQualifier,  // "new" | "old"
    Word,     // any single token
    Label,    // identifier-like token (letters, digits, hyphens)
};

struct CaptureSpec {
    std::string name;
    CaptureKind kind = CaptureKind::Word;
    std::string concept_type;  // for Concept captures: required IS-A ancestor
};

struct UtteranceTemplate {
    std::string id;
    std::vector<std::string> patterns;  // alternative surface forms, lowercase,
                                        // captures written as {name}
    std::vector<CaptureSpec> captures;
    std::string skeleton;  // frame notation with ${...} substitutions
};

struct NoTemplateMatch : std::runtime_error {
    explicit NoTemplateMatch(const std::string& utterance)
        : std::runtime_error("no utterance template matches: \"" + utterance + "\"") {}
};

struct AmbiguousCoref : std::runtime_error {
    AmbiguousCoref(const std::string& concept_name, size_t count)
        : std::runtime_error("coreference to " + concept_name + " has " + std::to_string(count) +
                             " candidate instances") {}
};

struct UncoveredConcept : std::runtime_error {
    explicit UncoveredConcept(const std::string& concept_name)
        : std::runtime_error("no generation template covers concept " + concept_name) {}
};

class TemplateEngine {
public:
    explicit TemplateEngine(const KnowledgeBase* kb);

    // Understanding: utterance text -> TMR frame document (provenance Tmr).
    // Throws NoTemplateMatch / AmbiguousCoref.
    FrameDocument utterance_to_tmr(const std::string& utterance, const CorefScope& scope) const;

    // Generation: GMR frame document -> canonical utterance text.
    // Throws UncoveredConcept.
    std::string gmr_to_utterance(const FrameDocument& gmr) const;

    // Phrase a cause hypothesis frame, e.g. OBSTRUCT(theme @PIPE) -> "a pipe
    // obstruction". Unregistered concepts get a generic phrase.
    std::string hypothesis_phrase(const FrameInstance& hypothesis) const;

    const std::vector<UtteranceTemplate>& templates() const { return templates_; }

private:
    const KnowledgeBase* kb_;
    std::vector<UtteranceTemplate> templates_;
};

// The canonical understanding template set.
std::vector<UtteranceTemplate> canonical_templates();

}  // namespace deckhand
