#include "deckhand/templates.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace deckhand {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

std::string hyphens_to_spaces(std::string s) {
    std::replace(s.begin(), s.end(), '-', ' ');
    return s;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else if (std::string_view(".,!?;:\"()").find(c) != std::string_view::npos) {
            // sentence punctuation separates tokens and is dropped
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

bool label_like(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '-';
    });
}

constexpr std::string_view kAgeRangeNew = "0.0001<>0.1";
constexpr std::string_view kAgeRangeOld = "0.7<>1";

}  // namespace

std::vector<UtteranceTemplate> canonical_templates() {
    std::vector<UtteranceTemplate> ts;

    ts.push_back(UtteranceTemplate{
        "m1-problem-report",
        {"the {obj} is overheating", "{obj} is overheating", "the {obj} is running hot"},
        {{"obj", CaptureKind::Concept, "MACHINE"}},
        "#DESCRIBE-MECHANICAL-PROBLEM.1\n"
        "  agent #HUMAN.1\n"
        "  beneficiary #LEIA.1\n"
        "  theme #OVERHEAT.1\n"
        "#OVERHEAT.1\n"
        "  theme #${obj:C}.1\n"
        "#${obj:C}.1\n"
        "  corefer ${obj:coref}\n"});

    ts.push_back(UtteranceTemplate{
        "m3-log-request",
        {"can you check the service logs", "can you check the logs", "check the service logs",
         "check the logs", "please check the service logs"},
        {},
        "#REQUEST-ACTION-ANALYZE-LOGS.1\n"
        "  agent #HUMAN.1\n"
        "  beneficiary #LEIA.1\n"
        "  theme ${coref:OVERHEAT}\n"});

    ts.push_back(UtteranceTemplate{
        "m5-fetch-request",
        {"please fetch a {age} {obj}", "fetch a {age} {obj}", "please bring me a {age} {obj}",
         "bring me a {age} {obj}", "please go fetch a {age} {obj}"},
        {{"age", CaptureKind::AgeQualifier, ""}, {"obj", CaptureKind::Concept, "PHYSICAL-OBJECT"}},
        "#REQUEST-ACTION-FETCH.1\n"
        "  agent #HUMAN.1\n"
        "  beneficiary #LEIA.1\n"
        "  theme #${obj:C}.1\n"
        "#${obj:C}.1\n"
        "  age ${age:range}\n"});

    ts.push_back(UtteranceTemplate{
        "m7-feature-description",
        {"it is a {color} {shape} labeled {label}", "it's a {color} {shape} labeled {label}",
         "it is a {color} {shape} with the label {label}",
         "the new thermostat is a {color} {shape} labeled {label}"},
        {{"color", CaptureKind::Word, ""},
         {"shape", CaptureKind::Word, ""},
         {"label", CaptureKind::Label, ""}},
        "#DESCRIBE-OBJECT-FEATURES.1\n"
        "  agent #HUMAN.1\n"
        "  beneficiary #LEIA.1\n"
        "  theme ${coref:THERMOSTAT}\n"
        "  label ${label}\n"
        "  color ${color}\n"
        "  shape ${shape}\n"});

    // reverse coverage of the generated M-forms, for round-trip grounding
    ts.push_back(UtteranceTemplate{
        "m2-hypothesis-suggestion",
        {"it might be a pipe obstruction or a broken thermostat"},
        {},
        "#ALTERNATIVE.1\n"
        "  domain #MODALITY.1\n"
        "  range #MODALITY.2\n"
        "#MODALITY.1\n"
        "  type EPISTEMIC\n"
        "  value 0.5\n"
        "  scope #OBSTRUCT.1\n"
        "#MODALITY.2\n"
        "  type EPISTEMIC\n"
        "  value 0.5\n"
        "  scope #STATE-OF-REPAIR.1\n"
        "#OBSTRUCT.1\n"
        "  theme @PIPE\n"
        "#STATE-OF-REPAIR.1\n"
        "  domain @THERMOSTAT\n"
        "  range <0.7\n"});

    ts.push_back(UtteranceTemplate{
        "m4-log-conclusion",
        {"according to the service log the {obj} is over two years old and should be replaced"},
        {{"obj", CaptureKind::Concept, "PHYSICAL-OBJECT"}},
        "#RECOMMEND-REPLACEMENT.1\n"
        "  theme @${obj:C}\n"});

    ts.push_back(UtteranceTemplate{
        "m6-feature-question",
        {"what does the new {obj} look like"},
        {{"obj", CaptureKind::Concept, "PHYSICAL-OBJECT"}},
        "#REQUEST-INFO.1\n"
        "  agent #LEIA.1\n"
        "  beneficiary #HUMAN.1\n"
        "  theme #${obj:C}.1\n"
        "  about features\n"
        "#${obj:C}.1\n"
        "  age 0.0001<>0.1\n"
        "  corefer ${obj:coref}\n"});

    ts.push_back(UtteranceTemplate{
        "m8-acknowledge",
        {"got it", "okay", "ok", "understood"},
        {},
        "#ACKNOWLEDGE.1\n"
        "  agent #LEIA.1\n"
        "  beneficiary #HUMAN.1\n"});

    ts.push_back(UtteranceTemplate{
        "m9-completion",
        {"i have delivered the {obj}"},
        {{"obj", CaptureKind::Concept, "PHYSICAL-OBJECT"}},
        "#INFORM-COMPLETION.1\n"
        "  agent #LEIA.1\n"
        "  beneficiary #HUMAN.1\n"
        "  theme #${obj:C}.1\n"
        "#${obj:C}.1\n"
        "  corefer ${obj:coref}\n"});

    return ts;
}

TemplateEngine::TemplateEngine(const KnowledgeBase* kb)
    : kb_(kb), templates_(canonical_templates()) {}

FrameDocument TemplateEngine::utterance_to_tmr(const std::string& utterance,
                                               const CorefScope& scope) const {
    auto tokens = tokenize(utterance);

    for (const auto& tpl : templates_) {
        auto capture_spec = [&](std::string_view name) -> const CaptureSpec* {
            for (const auto& c : tpl.captures)
                if (c.name == name) return &c;
            return nullptr;
        };
        for (const auto& pattern : tpl.patterns) {
            auto ptoks = tokenize(pattern);
            if (ptoks.size() != tokens.size()) continue;
            std::vector<std::pair<std::string, std::string>> captures;
            bool ok = true;
            for (size_t i = 0; i < ptoks.size() && ok; ++i) {
                const std::string& pt = ptoks[i];
                const std::string& ut = tokens[i];
                if (pt.size() >= 2 && pt.front() == '{' && pt.back() == '}') {
                    std::string name = pt.substr(1, pt.size() - 2);
                    const CaptureSpec* spec = capture_spec(name);
                    if (!spec) {
                        ok = false;
                        break;
                    }
                    switch (spec->kind) {
                        case CaptureKind::Concept: {
                            std::string concept_name = upper(ut);
                            if (!kb_->has_concept(concept_name) ||
                                !kb_->is_a(concept_name, spec->concept_type))
                                ok = false;
                            break;
                        }
                        case CaptureKind::AgeQualifier:
                            if (ut != "new" && ut != "old") ok = false;
                            break;
                        case CaptureKind::Label:
                            if (!label_like(ut)) ok = false;
                            break;
                        case CaptureKind::Word:
                            break;
                    }
                    if (ok) captures.emplace_back(name, ut);
                } else if (pt != ut) {
                    ok = false;
                }
            }
            if (!ok) continue;

            auto captured = [&](std::string_view name) -> const std::string& {
                for (const auto& [k, v] : captures)
                    if (k == name) return v;
                throw std::logic_error("capture not found: " + std::string(name));
            };
            auto unique_coref = [&](const std::string& concept_name) {
                auto ids = scope.instances_of ? scope.instances_of(concept_name) : std::vector<int>{};
                if (ids.size() != 1) throw AmbiguousCoref(concept_name, ids.size());
                return "->" + concept_name + "." + std::to_string(ids[0]);
            };

            // expand ${...} substitutions in the skeleton
            std::string text;
            const std::string& sk = tpl.skeleton;
            size_t pos = 0;
            while (pos < sk.size()) {
                size_t open = sk.find("${", pos);
                if (open == std::string::npos) {
                    text += sk.substr(pos);
                    break;
                }
                text += sk.substr(pos, open - pos);
                size_t close = sk.find('}', open);
                std::string inner = sk.substr(open + 2, close - open - 2);
                auto colon = inner.find(':');
                std::string head = colon == std::string::npos ? inner : inner.substr(0, colon);
                std::string mode = colon == std::string::npos ? "" : inner.substr(colon + 1);
                if (head == "coref") {
                    text += unique_coref(mode);
                } else if (mode == "C") {
                    text += upper(captured(head));
                } else if (mode == "range") {
                    text += captured(head) == "new" ? kAgeRangeNew : kAgeRangeOld;
                } else if (mode == "coref") {
                    text += unique_coref(upper(captured(head)));
                } else {
                    text += captured(head);
                }
                pos = close + 1;
            }

            FrameDocument doc = parse_frames(text);
            for (auto& f : doc.frames) f.provenance = Provenance::Tmr;
            return doc;
        }
    }
    throw NoTemplateMatch(utterance);
}

std::string TemplateEngine::hypothesis_phrase(const FrameInstance& hypothesis) const {
    auto concept_of = [](const Filler* f) -> std::string {
        if (!f) return "";
        if (const auto* cr = f->get<ConceptRef>()) return cr->concept_name;
        if (const auto* ir = f->get<InstanceRef>()) return ir->target.concept_name;
        return "";
    };
    if (hypothesis.id.concept_name == "OBSTRUCT") {
        std::string theme = concept_of(hypothesis.find("theme"));
        if (!theme.empty()) return "a " + hyphens_to_spaces(lower(theme)) + " obstruction";
    }
    if (hypothesis.id.concept_name == "STATE-OF-REPAIR") {
        std::string domain = concept_of(hypothesis.find("domain"));
        if (!domain.empty()) return "a broken " + hyphens_to_spaces(lower(domain));
    }
    return "a " + hyphens_to_spaces(lower(hypothesis.id.concept_name)) + " condition";
}

std::string TemplateEngine::gmr_to_utterance(const FrameDocument& gmr) const {
    if (gmr.frames.empty()) throw UncoveredConcept("(empty document)");
    const FrameInstance& root = gmr.frames.front();
    const std::string& concept_name = root.id.concept_name;

    auto theme_phrase = [&]() -> std::string {
        const Filler* theme = root.find("theme");
        if (!theme) return "object";
        std::string cname;
        const FrameInstance* frame = nullptr;
        if (const auto* cr = theme->get<ConceptRef>()) cname = cr->concept_name;
        if (const auto* ir = theme->get<InstanceRef>()) {
            cname = ir->target.concept_name;
            frame = gmr.find(ir->target);
        }
        if (const auto* co = theme->get<CoRef>()) cname = co->target.concept_name;
        std::string qualifier;
        if (frame) {
            if (const Filler* age = frame->find("age")) {
                if (const auto* r = age->get<NumericRange>()) {
                    if (r->hi <= 0.1) qualifier = "new ";
                    else if (r->lo >= 0.7) qualifier = "old ";
                }
            }
        }
        return qualifier + hyphens_to_spaces(lower(cname));
    };

    if (concept_name == "ALTERNATIVE") {
        std::vector<std::string> phrases;
        auto add_scope = [&](const Filler* mod_ref) {
            if (!mod_ref) return;
            const auto* ir = mod_ref->get<InstanceRef>();
            if (!ir) return;
            const FrameInstance* mod = gmr.find(ir->target);
            if (!mod) return;
            const Filler* scope = mod->find("scope");
            if (!scope) return;
            const auto* sr = scope->get<InstanceRef>();
            if (!sr) return;
            if (const FrameInstance* hyp = gmr.find(sr->target))
                phrases.push_back(hypothesis_phrase(*hyp));
        };
        add_scope(root.find("domain"));
        for (const Filler* r : root.all("range")) add_scope(r);
        if (phrases.empty()) throw UncoveredConcept("ALTERNATIVE without hypotheses");
        std::string joined;
        if (phrases.size() == 2) {
            joined = phrases[0] + " or " + phrases[1];
        } else {
            for (size_t i = 0; i < phrases.size(); ++i) {
                if (i) joined += i + 1 == phrases.size() ? ", or " : ", ";
                joined += phrases[i];
            }
        }
        return "It might be " + joined + ".";
    }
    if (concept_name == "MODALITY") {
        const Filler* scope = root.find("scope");
        const auto* sr = scope ? scope->get<InstanceRef>() : nullptr;
        const FrameInstance* hyp = sr ? gmr.find(sr->target) : nullptr;
        if (!hyp) throw UncoveredConcept("MODALITY without scope");
        return "The cause is " + hypothesis_phrase(*hyp) + ".";
    }
    if (concept_name == "REPORT-NO-CAUSES") return "I do not know of any likely causes.";
    if (concept_name == "RECOMMEND-REPLACEMENT")
        return "According to the service log, the " + theme_phrase() +
               " is over two years old and should be replaced.";
    if (concept_name == "REQUEST-INFO") {
        if (const Filler* about = root.find("about")) {
            if (const auto* t = about->get<Text>()) {
                if (t->value == "restatement")
                    return "Sorry, I did not understand. Could you say that differently?";
                if (t->value == "referent") return "Which one do you mean?";
            }
        }
        return "What does the " + theme_phrase() + " look like?";
    }
    if (concept_name == "ACKNOWLEDGE") return "Got it.";
    if (concept_name == "INFORM-COMPLETION") return "I have delivered the " + theme_phrase() + ".";
    if (concept_name == "REPORT-INABILITY") {
        std::string reason = "unable to proceed";
        if (const Filler* r = root.find("reason"))
            if (const auto* t = r->get<Text>()) reason = t->value;
        return "I cannot complete that: " + reason + ".";
    }
    throw UncoveredConcept(concept_name);
}

}  // namespace deckhand
