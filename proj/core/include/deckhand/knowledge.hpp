#pragma once
// Knowledge resources: the concept ontology with causal links, procedural
// scripts and metascripts, the engine service log, and episodic memory.
//
// Ontology and script files use the frame notation's line discipline:
// a header at column 0 opens a block, indented KEY lines fill it.
//
//   @CONCEPT-NAME
//     IS-A PARENT ...
//     SLOT name constraint
//     CAUSED-BY CONCEPT(slot filler, ...) IF-THEME CONCEPT
//     TRIGGERS-GOAL GOAL-CONCEPT
//
//   SCRIPT script-id
//     GOAL goal-concept
//     PRECONDITION subject FROM source ...
//     STEP COMMAND|TOOL|SPEECH|SUBPLAN name key=value ...
//
//   METASCRIPT script-id
//     RESOLVES requirement-subject
//     STEP ...
//
// The service log is one tab-separated entry per line:
// date<TAB>component<TAB>action<TAB>note, ISO-8601 dates.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deckhand/frames.hpp"

namespace deckhand {

struct Date {
    int year = 0, month = 0, day = 0;
    bool operator==(const Date&) const = default;
    auto operator<=>(const Date&) const = default;
    std::string iso() const;
};

Date parse_date(std::string_view iso);          // throws ParseError
int months_between(const Date& from, const Date& to);

struct CauseLink {
    std::string id;              // SYMPTOM#ordinal, assigned in declaration order
    std::string symptom;
    FrameInstance cause_template;
    std::optional<std::string> applicability;  // theme concept restriction
    bool operator==(const CauseLink&) const = default;
};

struct SlotDef {
    std::string slot;
    std::string constraint;
    bool operator==(const SlotDef&) const = default;
};

struct Concept {
    std::string name;
    std::vector<std::string> parents;
    std::vector<SlotDef> slot_defs;
    std::vector<CauseLink> causal_links;
    std::optional<std::string> triggers_goal;
    bool operator==(const Concept&) const = default;
};

enum class Source { SituationModel, EpisodicMemory, AskTeammate };

std::string_view source_name(Source s);

struct KnowledgeRequirement {
    std::string subject;                  // slot path on the plan theme
    std::vector<Source> resolution_order;
    bool operator==(const KnowledgeRequirement&) const = default;
};

enum class StepKind { Command, Tool, Speech, SubPlan };

std::string_view step_kind_name(StepKind k);

struct Step {
    StepKind kind = StepKind::Command;
    std::string name;
    std::vector<std::pair<std::string, std::string>> params;  // $-prefixed values are variables
    bool operator==(const Step&) const = default;
};

struct Script {
    std::string id;
    std::string goal_concept;  // empty for metascripts
    std::vector<KnowledgeRequirement> preconditions;
    std::vector<Step> steps;
    bool is_metascript = false;
    std::optional<std::string> metascript_trigger;  // requirement subject it resolves
    bool operator==(const Script&) const = default;
};

struct EpisodicRecord {
    int timestamp = 0;
    FrameInstance content;
};

struct ServiceLogEntry {
    Date date;
    std::string component;
    std::string action;
    std::string note;
    bool operator==(const ServiceLogEntry&) const = default;
};

struct KnowledgeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Append-only, single writer (the strategic agent).
class EpisodicStore {
public:
    void append(EpisodicRecord rec);  // throws on timestamp regression

    // Most recent record whose content satisfies the pattern frame
    // (concept match plus filler_satisfies on every pattern slot). Ties on
    // timestamp resolve to the later store position.
    std::optional<EpisodicRecord> lookup(const FrameInstance& pattern) const;

    const std::vector<EpisodicRecord>& records() const { return records_; }

private:
    std::vector<EpisodicRecord> records_;
};

class KnowledgeBase {
public:
    static KnowledgeBase load(std::string_view ontology_text, std::string_view scripts_text,
                              std::string_view log_text);

    const Concept* find_concept(std::string_view name) const;
    bool has_concept(std::string_view name) const { return find_concept(name) != nullptr; }
    bool is_a(std::string_view concept_name, std::string_view ancestor) const;  // reflexive

    struct CauseQuery {
        bool inherit_isa = false;  // also accept links whose applicability is an ancestor
    };
    std::vector<const CauseLink*> find_causes(std::string_view symptom, std::string_view theme,
                                              const CauseQuery& q) const;
    std::vector<const CauseLink*> find_causes(std::string_view symptom,
                                              std::string_view theme) const {
        return find_causes(symptom, theme, CauseQuery{});
    }
    // Breadth-first closure over cause links, nearest causes first.
    std::vector<const CauseLink*> find_causes_transitive(std::string_view symptom,
                                                         std::string_view theme) const;

    const Script* script_for_goal(std::string_view goal_concept) const;
    const Script* metascript_for(std::string_view requirement_subject) const;
    const Script* script(std::string_view id) const;

    std::vector<ServiceLogEntry> search_logs(std::string_view query) const;
    const std::vector<ServiceLogEntry>& log() const { return log_; }

    const std::vector<Concept>& concepts() const { return concepts_; }
    const std::vector<Script>& scripts() const { return scripts_; }

    bool operator==(const KnowledgeBase& o) const {
        return concepts_ == o.concepts_ && scripts_ == o.scripts_ && log_ == o.log_;
    }

private:
    void validate() const;

    std::vector<Concept> concepts_;
    std::vector<Script> scripts_;
    std::vector<ServiceLogEntry> log_;
};

struct KnowledgeTexts {
    std::string ontology;
    std::string scripts;
    std::string log;
};

KnowledgeTexts render_knowledge(const KnowledgeBase& kb);

}  // namespace deckhand
