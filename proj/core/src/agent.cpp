#include "deckhand/agent.hpp"

#include <algorithm>
#include <cctype>

namespace deckhand {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool is_dialogue_script(const Script& s) {
    return std::none_of(s.steps.begin(), s.steps.end(),
                        [](const Step& st) { return st.kind == StepKind::Command; });
}

bool clearance_note(const std::string& note) {
    std::string n = lower(note);
    return n.find("no obstruction") != std::string::npos ||
           n.find("nominal") != std::string::npos || n.find("ok") != std::string::npos;
}

}  // namespace

std::string_view plan_status_name(PlanStatus s) {
    switch (s) {
        case PlanStatus::Pending: return "pending";
        case PlanStatus::Active: return "active";
        case PlanStatus::Blocked: return "blocked";
        case PlanStatus::Done: return "done";
        case PlanStatus::Failed: return "failed";
    }
    return "pending";
}

FrameInstance& SituationModel::add(std::string concept_name, int tick) {
    int next = 1;
    for (const auto& f : frames_)
        if (f.id.concept_name == concept_name) next = std::max(next, f.id.index + 1);
    frames_.push_back(FrameInstance{{std::move(concept_name), next}, {}, Provenance::Situation, tick});
    last_update_ = tick;
    return frames_.back();
}

FrameInstance* SituationModel::find(const InstanceId& id) {
    for (auto& f : frames_)
        if (f.id == id) return &f;
    return nullptr;
}

const FrameInstance* SituationModel::find(const InstanceId& id) const {
    for (const auto& f : frames_)
        if (f.id == id) return &f;
    return nullptr;
}

std::vector<int> SituationModel::instances_of(std::string_view concept_name) const {
    std::vector<int> out;
    for (const auto& f : frames_)
        if (f.id.concept_name == concept_name) out.push_back(f.id.index);
    return out;
}

GroundResult ground_vmr(const FrameDocument& vmr, const Json& expected) {
    if (vmr.frames.empty()) throw KnowledgeError("malformed VMR: no frames");
    const FrameInstance& root = vmr.frames.front();
    GroundResult res;
    for (const auto& [key, want] : expected.items()) {
        const Filler* have = root.find(key);
        if (key == "age" && want.is_object()) {
            const auto* n = have ? have->get<Number>() : nullptr;
            if (!n || n->value < want.value("min", 0.0) || n->value > want.value("max", 1.0))
                res.mismatches.push_back("age");
            continue;
        }
        if (want.is_string()) {
            const auto* t = have ? have->get<Text>() : nullptr;
            if (!t || t->value != want.get<std::string>()) res.mismatches.push_back(key);
            continue;
        }
        res.mismatches.push_back(key);  // unsupported expectation shape
    }
    res.match = res.mismatches.empty();
    return res;
}

FrameDocument build_diagnosis_gmr(const std::vector<const CauseLink*>& causes) {
    FrameDocument doc;
    auto add_frame = [&](FrameInstance f) -> FrameInstance& {
        int next = 1;
        for (const auto& g : doc.frames)
            if (g.id.concept_name == f.id.concept_name) next = std::max(next, g.id.index + 1);
        f.id.index = next;
        f.provenance = Provenance::Gmr;
        doc.frames.push_back(std::move(f));
        return doc.frames.back();
    };

    const size_t k = causes.size();
    if (k == 0) {
        add_frame(FrameInstance{{"REPORT-NO-CAUSES", 1}, {}, Provenance::Gmr, 0});
        return doc;
    }

    std::vector<FrameInstance> hypotheses;
    for (const auto* link : causes) {
        FrameInstance h = link->cause_template;
        h.id.index = 1;
        hypotheses.push_back(std::move(h));
    }

    if (k == 1) {
        FrameInstance modality{{"MODALITY", 1}, {}, Provenance::Gmr, 0};
        modality.slots.push_back({"type", make_text("EPISTEMIC")});
        modality.slots.push_back({"value", make_number(1.0)});
        modality.slots.push_back({"scope", make_instance_ref(hypotheses[0].id.concept_name, 1)});
        add_frame(std::move(modality));
        add_frame(std::move(hypotheses[0]));
        return doc;
    }

    FrameInstance alt{{"ALTERNATIVE", 1}, {}, Provenance::Gmr, 0};
    for (size_t i = 0; i < k; ++i)
        alt.slots.push_back({i == 0 ? "domain" : "range", make_instance_ref("MODALITY", static_cast<int>(i + 1))});
    add_frame(std::move(alt));

    // hypothesis indices must be assigned before the modalities reference them
    std::vector<InstanceId> hyp_ids;
    {
        std::map<std::string, int> counters;
        for (const auto& h : hypotheses)
            hyp_ids.push_back({h.id.concept_name, ++counters[h.id.concept_name]});
    }
    for (size_t i = 0; i < k; ++i) {
        FrameInstance modality{{"MODALITY", static_cast<int>(i + 1)}, {}, Provenance::Gmr, 0};
        modality.slots.push_back({"type", make_text("EPISTEMIC")});
        modality.slots.push_back({"value", make_number(1.0 / static_cast<double>(k))});
        modality.slots.push_back(
            {"scope", Filler{InstanceRef{hyp_ids[i]}}});
        doc.frames.push_back(std::move(modality));
    }
    for (size_t i = 0; i < k; ++i) {
        FrameInstance h = std::move(hypotheses[i]);
        h.id = hyp_ids[i];
        h.provenance = Provenance::Gmr;
        doc.frames.push_back(std::move(h));
    }
    return doc;
}

OntoAgent::OntoAgent(const KnowledgeBase* kb, const ScenarioFixture* fixture)
    : kb_(kb), fixture_(fixture), templates_(kb) {
    for (const auto& pre : fixture->situation_preload) {
        FrameInstance f{pre.id, {}, Provenance::Situation, 0};
        for (const auto& [name, value] : pre.slots) f.slots.push_back({name, make_text(value)});
        // preloaded instances keep their fixture indices
        situation_.add(pre.id.concept_name, 0) = f;
    }
    for (const auto& [tick, content] : fixture->episodic_preload)
        episodic_.append(EpisodicRecord{tick, content});
}

CorefScope OntoAgent::scope() {
    return CorefScope{
        [this](std::string_view concept_name) { return situation_.instances_of(concept_name); }};
}

void OntoAgent::reason(AgentOutput& out, std::string rule, std::vector<std::string> refs,
                       std::string note) {
    Json r;
    r["rule"] = std::move(rule);
    r["refs"] = refs;
    r["note"] = std::move(note);
    out.reasoning.push_back(std::move(r));
}

bool OntoAgent::idle() const {
    if (inflight_) return false;
    for (const auto& e : agenda_)
        if (e.status == PlanStatus::Pending || e.status == PlanStatus::Active) return false;
    return true;
}

void OntoAgent::observe_frame(const PerceptionFrame& frame) { last_frame_ = frame; }

void OntoAgent::note_dispatch(int action_id) {
    if (inflight_ && inflight_->action_id == 0) inflight_->action_id = action_id;
}

AgentOutput OntoAgent::step(const AgentEvent& event, int tick) {
    AgentOutput out;
    if (const auto* d = std::get_if<DialogueHeard>(&event)) {
        FrameDocument tmr;
        try {
            tmr = templates_.utterance_to_tmr(d->text, scope());
        } catch (const NoTemplateMatch&) {
            reason(out, "no-template-match", {}, "utterance outside template coverage");
            FrameDocument gmr;
            FrameInstance f{{"REQUEST-INFO", 1}, {}, Provenance::Gmr, tick};
            f.slots.push_back({"about", make_text("restatement")});
            gmr.frames.push_back(std::move(f));
            say_gmr(gmr, "clarification-request", {}, tick, out);
            return out;
        } catch (const AmbiguousCoref& e) {
            reason(out, "ambiguous-coreference", {}, e.what());
            FrameDocument gmr;
            FrameInstance f{{"REQUEST-INFO", 1}, {}, Provenance::Gmr, tick};
            f.slots.push_back({"about", make_text("referent")});
            gmr.frames.push_back(std::move(f));
            say_gmr(gmr, "clarification-request", {}, tick, out);
            return out;
        }
        ingest_tmr(tmr, tick, out);
        run_agenda(tick, out);
    } else if (const auto* v = std::get_if<VmrCandidate>(&event)) {
        if (!inflight_ || inflight_->command != "SEARCH" ||
            inflight_->action_id != v->action_id) {
            return out;  // stale candidate
        }
        FrameDocument vmr = parse_frames(v->vmr_text);
        if (vmr.frames.empty()) throw KnowledgeError("malformed VMR: no frames");
        episodic_.append(EpisodicRecord{tick, vmr.frames.front()});

        AgendaEntry& entry = agenda_[inflight_->entry_index];
        const Json& expected = entry.plan.bindings.value("features-of-theme", Json::object());
        GroundResult res = ground_vmr(vmr, expected);
        std::string candidate;
        if (const Filler* oid = vmr.frames.front().find("object-id"))
            if (const auto* t = oid->get<Text>()) candidate = t->value;
        if (res.match) {
            reason(out, "grounding-match", {entry.plan.script_id},
                   "candidate " + candidate + " satisfies expected features");
            entry.plan.bindings["candidate"] = candidate;
            entry.plan.cursor += 1;  // the SEARCH step is strategically complete
            inflight_.reset();
            run_agenda(tick, out);
        } else {
            std::string why;
            for (const auto& m : res.mismatches) why += (why.empty() ? "" : ", ") + m;
            reason(out, "grounding-mismatch", {entry.plan.script_id},
                   "candidate " + candidate + " rejected on: " + why + "; search resumes");
            Json exclude = entry.plan.bindings.value("exclude", Json::array());
            exclude.push_back(candidate);
            entry.plan.bindings["exclude"] = exclude;
            inflight_.reset();
            run_agenda(tick, out);  // re-dispatches the SEARCH step with the exclusion
        }
    } else if (const auto* o = std::get_if<CommandOutcome>(&event)) {
        if (!inflight_ || inflight_->action_id != o->action_id) return out;  // stale
        AgendaEntry& entry = agenda_[inflight_->entry_index];
        if (o->state == SkillState::Succeeded) {
            reason(out, "step-outcome", {entry.plan.script_id},
                   o->command + " succeeded: " + o->detail.value("note", ""));
            entry.plan.cursor += 1;
            inflight_.reset();
            run_agenda(tick, out);
        } else if (o->state == SkillState::Failed) {
            reason(out, "step-outcome", {entry.plan.script_id},
                   o->command + " failed: " + o->detail.value("note", ""));
            entry.status = PlanStatus::Failed;
            inflight_.reset();
            report_inability(o->command + " failed (" + o->detail.value("note", "") + ")",
                             {entry.plan.script_id}, tick, out);
            run_agenda(tick, out);
        } else {  // externally preempted
            reason(out, "step-outcome", {entry.plan.script_id}, o->command + " preempted");
            entry.status = PlanStatus::Blocked;
            entry.plan.missing = {
                KnowledgeRequirement{"actionability: externally preempted", {Source::SituationModel}}};
            inflight_.reset();
        }
    } else {
        run_agenda(tick, out);  // clock tick: agenda housekeeping only
    }
    return out;
}

InstanceId OntoAgent::ingest_theme(const FrameDocument& doc, const Filler& theme, int tick) {
    if (const auto* co = theme.get<CoRef>()) {
        if (!situation_.find(co->target))
            situation_.add(co->target.concept_name, tick);
        return co->target;
    }
    if (const auto* ir = theme.get<InstanceRef>()) {
        const FrameInstance* f = doc.find(ir->target);
        if (!f) {
            // external participant reference; resolve directly to the situation
            if (!situation_.find(ir->target)) situation_.add(ir->target.concept_name, tick);
            return ir->target;
        }
        if (const Filler* coref = f->find("corefer")) {
            if (const auto* c = coref->get<CoRef>()) {
                if (!situation_.find(c->target)) situation_.add(c->target.concept_name, tick);
                FrameInstance* sit = situation_.find(c->target);
                for (const auto& slot : f->slots)
                    if (slot.name != "corefer") sit->set(slot.name, slot.value);
                return c->target;
            }
        }
        FrameInstance& sit = situation_.add(f->id.concept_name, tick);
        InstanceId sit_id = sit.id;
        for (const auto& slot : f->slots) {
            if (slot.value.is<InstanceRef>()) {
                InstanceId nested = ingest_theme(doc, slot.value, tick);
                situation_.find(sit_id)->set(slot.name, Filler{InstanceRef{nested}});
            } else {
                situation_.find(sit_id)->set(slot.name, slot.value);
            }
        }
        return sit_id;
    }
    if (const auto* cr = theme.get<ConceptRef>()) return situation_.add(cr->concept_name, tick).id;
    return situation_.add("ALL", tick).id;
}

void OntoAgent::ingest_tmr(const FrameDocument& tmr, int tick, AgentOutput& out) {
    if (tmr.frames.empty()) return;
    const FrameInstance& root = tmr.frames.front();
    const Concept* concept_name = kb_->find_concept(root.id.concept_name);

    if (concept_name && concept_name->triggers_goal) {
        const Filler* theme = root.find("theme");
        if (!theme) {
            reason(out, "unintegrable-input", {}, "speech act without a theme");
            return;
        }
        InstanceId theme_id = ingest_theme(tmr, *theme, tick);
        std::optional<InstanceId> requester;
        if (const Filler* agent = root.find("agent"))
            if (const auto* ir = agent->get<InstanceRef>()) requester = ir->target;
        post_goal(*concept_name->triggers_goal, theme_id, requester, tick, out);
        return;
    }
    if (root.id.concept_name == "DESCRIBE-OBJECT-FEATURES") {
        refine_features(tmr, tick, out);
        return;
    }
    reason(out, "unintegrable-input", {root.id.concept_name},
           "no goal or refinement applies to " + root.id.concept_name);
}

void OntoAgent::post_goal(const std::string& goal_concept, const InstanceId& theme,
                          std::optional<InstanceId> requester, int tick, AgentOutput& out) {
    for (const auto& e : agenda_) {
        if (e.goal.id.concept_name != goal_concept) continue;
        if (e.status != PlanStatus::Pending && e.status != PlanStatus::Active &&
            e.status != PlanStatus::Blocked)
            continue;
        const Filler* t = e.goal.find("theme");
        const auto* ir = t ? t->get<InstanceRef>() : nullptr;
        if (ir && ir->target.concept_name == theme.concept_name) {
            reason(out, "goal-duplicate-ignored", {goal_concept},
                   "goal already on the agenda for theme " + theme.concept_name);
            return;
        }
    }

    const Script* script = kb_->script_for_goal(goal_concept);
    if (!script) {
        reason(out, "goal-posted", {goal_concept}, "no script for goal");
        report_inability("no known procedure for " + goal_concept, {goal_concept}, tick, out);
        return;
    }

    AgendaEntry entry;
    entry.goal.id = {goal_concept, static_cast<int>(agenda_.size()) + 1};
    entry.goal.tick = tick;
    entry.goal.slots.push_back({"theme", Filler{InstanceRef{theme}}});
    if (requester) entry.goal.slots.push_back({"requester", Filler{InstanceRef{*requester}}});
    entry.plan.script_id = script->id;
    entry.plan.bindings["theme"] = theme.str();
    entry.plan.bindings["theme-type"] = lower(theme.concept_name);
    if (requester) {
        if (const FrameInstance* r = situation_.find(*requester))
            if (const Filler* loc = r->find("located-at"))
                if (const auto* t = loc->get<Text>())
                    entry.plan.bindings["requester-location"] = t->value;
    }
    entry.status = PlanStatus::Pending;
    entry.announce_completion = requester.has_value() && !is_dialogue_script(*script);

    reason(out, "goal-posted", {goal_concept, script->id},
           "goal " + goal_concept + " posted for theme " + theme.str());
    reason(out, "plan-instantiated", {script->id},
           "plan " + script->id + " instantiated from script");
    agenda_.push_back(std::move(entry));
}

void OntoAgent::refine_features(const FrameDocument& tmr, int tick, AgentOutput& out) {
    const FrameInstance& root = tmr.frames.front();
    const Filler* theme = root.find("theme");
    const auto* co = theme ? theme->get<CoRef>() : nullptr;
    if (!co || !situation_.find(co->target)) {
        reason(out, "unintegrable-input", {"DESCRIBE-OBJECT-FEATURES"},
               "feature description lacks a resolvable theme");
        return;
    }
    FrameInstance* sit = situation_.find(co->target);
    int merged = 0;
    for (const auto& slot : root.slots) {
        if (slot.name == "agent" || slot.name == "beneficiary" || slot.name == "theme") continue;
        sit->set(slot.name, slot.value);
        ++merged;
    }
    situation_.touch(tick);
    reason(out, "feature-refinement", {co->target.str()},
           std::to_string(merged) + " feature slot(s) merged onto " + co->target.str());

    bool unblocked = false;
    for (auto& e : agenda_) {
        if (e.status != PlanStatus::Blocked) continue;
        const Filler* t = e.goal.find("theme");
        const auto* ir = t ? t->get<InstanceRef>() : nullptr;
        if (ir && ir->target == co->target) {
            e.status = PlanStatus::Pending;  // re-verify on the next agenda pass
            unblocked = true;
        }
    }
    if (unblocked || merged > 0) {
        FrameDocument gmr;
        FrameInstance ack{{"ACKNOWLEDGE", 1}, {}, Provenance::Gmr, tick};
        ack.slots.push_back({"agent", make_instance_ref("LEIA", 1)});
        ack.slots.push_back({"beneficiary", make_instance_ref("HUMAN", 1)});
        gmr.frames.push_back(std::move(ack));
        say_gmr(gmr, "backchannel", {co->target.str()}, tick, out);
    }
}

void OntoAgent::run_agenda(int tick, AgentOutput& out) {
    for (int guard = 0; guard < 64; ++guard) {
        if (inflight_) return;

        size_t pick = agenda_.size();
        // resume the active plan unless a dialogue-class goal is pending
        size_t active = agenda_.size();
        for (size_t i = 0; i < agenda_.size(); ++i)
            if (agenda_[i].status == PlanStatus::Active) active = i;
        size_t pending_dialogue = agenda_.size();
        size_t pending_any = agenda_.size();
        for (size_t i = 0; i < agenda_.size(); ++i) {
            if (agenda_[i].status != PlanStatus::Pending) continue;
            if (pending_any == agenda_.size()) pending_any = i;
            const Script* s = kb_->script(agenda_[i].plan.script_id);
            if (s && is_dialogue_script(*s) && pending_dialogue == agenda_.size())
                pending_dialogue = i;
        }
        if (pending_dialogue < agenda_.size())
            pick = pending_dialogue;  // dialogue responses preempt between steps
        else if (active < agenda_.size())
            pick = active;
        else
            pick = pending_any;
        if (pick >= agenda_.size()) return;

        AgendaEntry& entry = agenda_[pick];
        if (entry.status == PlanStatus::Pending) {
            if (!verify_preconditions(entry, tick, out)) continue;
            entry.status = PlanStatus::Active;
        }
        if (entry.status == PlanStatus::Active) execute_active(entry, pick, tick, out);
    }
}

bool OntoAgent::verify_preconditions(AgendaEntry& entry, int tick, AgentOutput& out) {
    const Script* script = kb_->script(entry.plan.script_id);
    entry.plan.missing.clear();

    const Filler* themeRef = entry.goal.find("theme");
    const auto* themeIr = themeRef ? themeRef->get<InstanceRef>() : nullptr;
    const FrameInstance* theme = themeIr ? situation_.find(themeIr->target) : nullptr;

    for (const auto& req : script->preconditions) {
        if (entry.plan.bindings.contains(req.subject)) continue;
        bool resolved = false;
        for (Source src : req.resolution_order) {
            if (resolved) break;
            switch (src) {
                case Source::SituationModel: {
                    if (!theme) break;
                    if (req.subject == "features-of-theme") {
                        const Filler* label = theme->find("label");
                        if (!label) break;
                        Json features = Json::object();
                        if (const auto* t = label->get<Text>()) features["label"] = t->value;
                        if (const Filler* color = theme->find("color"))
                            if (const auto* t = color->get<Text>()) features["color"] = t->value;
                        if (const Filler* age = theme->find("age"))
                            if (const auto* r = age->get<NumericRange>())
                                features["age"] = Json{{"min", r->lo}, {"max", r->hi}};
                        entry.plan.bindings[req.subject] = features;
                        resolved = true;
                        reason(out, "precondition-satisfied",
                               {entry.plan.script_id, req.subject},
                               req.subject + " bound from the situation model");
                    } else if (req.subject == "location-of-theme") {
                        const Filler* loc = theme->find("located-in");
                        if (!loc) loc = theme->find("located-at");
                        if (!loc) break;
                        std::string where;
                        if (const auto* cr = loc->get<ConceptRef>()) where = lower(cr->concept_name);
                        if (const auto* t = loc->get<Text>()) where = t->value;
                        if (where.empty()) break;
                        entry.plan.bindings[req.subject] = where;
                        resolved = true;
                        reason(out, "precondition-satisfied",
                               {entry.plan.script_id, req.subject},
                               req.subject + " bound from the situation model");
                    }
                    break;
                }
                case Source::EpisodicMemory: {
                    if (!theme) break;
                    FrameInstance pattern{{theme->id.concept_name, 1}, {}, Provenance::Situation, 0};
                    if (req.subject == "location-of-theme")
                        pattern.slots.push_back({"located-in", Filler{Wildcard{}}});
                    else
                        break;  // only locations are episodically resolvable here
                    auto rec = episodic_.lookup(pattern);
                    if (!rec) break;
                    const Filler* loc = rec->content.find("located-in");
                    std::string where;
                    if (loc) {
                        if (const auto* cr = loc->get<ConceptRef>()) where = lower(cr->concept_name);
                        if (const auto* t = loc->get<Text>()) where = t->value;
                    }
                    if (where.empty()) break;
                    entry.plan.bindings[req.subject] = where;
                    resolved = true;
                    reason(out, "episodic-binding",
                           {entry.plan.script_id, req.subject,
                            "episodic@" + std::to_string(rec->timestamp)},
                           req.subject + " = " + where + " retrieved from episodic memory");
                    break;
                }
                case Source::AskTeammate:
                    break;  // unresolved: surfaces as missing
            }
        }
        if (!resolved) entry.plan.missing.push_back(req);
    }

    if (entry.plan.missing.empty()) {
        reason(out, "preconditions-verified", {entry.plan.script_id},
               "all knowledge requirements hold");
        return true;
    }
    entry.status = PlanStatus::Blocked;
    std::string subjects;
    for (const auto& m : entry.plan.missing)
        subjects += (subjects.empty() ? "" : ", ") + m.subject;
    reason(out, "precondition-missing", {entry.plan.script_id}, "missing: " + subjects);
    size_t entry_index = static_cast<size_t>(&entry - agenda_.data());
    for (const auto& m : entry.plan.missing) activate_metascript(entry, m, tick, out);
    (void)entry_index;
    return false;
}

void OntoAgent::activate_metascript(AgendaEntry& entry, const KnowledgeRequirement& req, int tick,
                                    AgentOutput& out) {
    if (req.resolution_order.empty() || req.resolution_order.back() != Source::AskTeammate) {
        entry.status = PlanStatus::Failed;
        report_inability("requirement " + req.subject + " cannot be resolved",
                         {entry.plan.script_id, req.subject}, tick, out);
        return;
    }
    const Script* meta = kb_->metascript_for(req.subject);
    if (!meta) {
        entry.status = PlanStatus::Failed;
        report_inability("no metascript resolves " + req.subject,
                         {entry.plan.script_id, req.subject}, tick, out);
        return;
    }
    size_t entry_index = static_cast<size_t>(&entry - agenda_.data());
    int& asked = questions_asked_[{entry_index, req.subject}];
    if (asked >= 2) {
        entry.status = PlanStatus::Failed;
        report_inability("teammate answers did not establish " + req.subject,
                         {meta->id, req.subject}, tick, out);
        return;
    }
    ++asked;

    const Filler* themeRef = entry.goal.find("theme");
    const auto* themeIr = themeRef ? themeRef->get<InstanceRef>() : nullptr;
    const FrameInstance* theme = themeIr ? situation_.find(themeIr->target) : nullptr;

    reason(out, "metascript-activated", {meta->id, req.subject},
           "asking teammate to resolve " + req.subject);

    FrameDocument gmr;
    FrameInstance q{{"REQUEST-INFO", 1}, {}, Provenance::Gmr, tick};
    q.slots.push_back({"agent", make_instance_ref("LEIA", 1)});
    q.slots.push_back({"beneficiary", make_instance_ref("HUMAN", 1)});
    if (theme) {
        q.slots.push_back({"theme", make_instance_ref(theme->id.concept_name, 1)});
        q.slots.push_back(
            {"about", make_text(req.subject == "location-of-theme" ? "location" : "features")});
        FrameInstance t{{theme->id.concept_name, 1}, {}, Provenance::Gmr, tick};
        if (const Filler* age = theme->find("age")) t.slots.push_back({"age", *age});
        t.slots.push_back({"corefer", Filler{CoRef{theme->id}}});
        gmr.frames.push_back(std::move(q));
        gmr.frames.push_back(std::move(t));
    } else {
        q.slots.push_back({"about", make_text("features")});
        gmr.frames.push_back(std::move(q));
    }
    say_gmr(gmr, "metascript-question", {meta->id, req.subject}, tick, out);
}

void OntoAgent::execute_active(AgendaEntry& entry, size_t entry_index, int tick,
                               AgentOutput& out) {
    const Script* script = kb_->script(entry.plan.script_id);
    while (entry.plan.cursor < script->steps.size()) {
        const Step& step = script->steps[entry.plan.cursor];
        switch (step.kind) {
            case StepKind::Tool: {
                if (step.name == "FIND-CAUSES") {
                    run_find_causes(entry, tick, out);
                } else if (step.name == "SEARCHLOGS") {
                    run_searchlogs(entry, tick, out);
                } else {
                    entry.status = PlanStatus::Failed;
                    report_inability("unknown tool " + step.name, {script->id}, tick, out);
                    return;
                }
                entry.plan.cursor += 1;
                break;
            }
            case StepKind::Speech: {
                if (step.name == "REPORT-CAUSES" || step.name == "REPORT-LOG-CONCLUSION") {
                    // the preceding tool step left the report in last_hypotheses_ scratch
                    say_gmr(pending_report_, step.name == "REPORT-CAUSES" ? "diagnosis-report"
                                                                          : "log-conclusion",
                            {script->id}, tick, out);
                } else {
                    entry.status = PlanStatus::Failed;
                    report_inability("unknown speech step " + step.name, {script->id}, tick, out);
                    return;
                }
                entry.plan.cursor += 1;
                break;
            }
            case StepKind::Command: {
                auto cmd = select_action(entry, step, tick, out);
                if (!cmd) return;  // blocked on actionability
                out.commands.push_back(*cmd);
                inflight_ = Pending{0, entry_index, entry.plan.cursor, cmd->name};
                return;
            }
            case StepKind::SubPlan: {
                entry.status = PlanStatus::Failed;
                report_inability("subplans are not in the fixture set", {script->id}, tick, out);
                return;
            }
        }
    }
    entry.status = PlanStatus::Done;
    reason(out, "plan-completed", {script->id}, "plan " + script->id + " completed");
    if (entry.announce_completion) {
        const Filler* themeRef = entry.goal.find("theme");
        const auto* ir = themeRef ? themeRef->get<InstanceRef>() : nullptr;
        FrameDocument gmr;
        FrameInstance done{{"INFORM-COMPLETION", 1}, {}, Provenance::Gmr, tick};
        done.slots.push_back({"agent", make_instance_ref("LEIA", 1)});
        done.slots.push_back({"beneficiary", make_instance_ref("HUMAN", 1)});
        if (ir) {
            done.slots.push_back({"theme", make_instance_ref(ir->target.concept_name, 1)});
            FrameInstance t{{ir->target.concept_name, 1}, {}, Provenance::Gmr, tick};
            t.slots.push_back({"corefer", Filler{CoRef{ir->target}}});
            gmr.frames.push_back(std::move(done));
            gmr.frames.push_back(std::move(t));
        } else {
            gmr.frames.push_back(std::move(done));
        }
        say_gmr(gmr, "completion-announced", {script->id}, tick, out);
    }
}

std::optional<Command> OntoAgent::select_action(AgendaEntry& entry, const Step& step, int,
                                                AgentOutput& out) {
    auto block = [&](const std::string& reason_text) -> std::optional<Command> {
        entry.status = PlanStatus::Blocked;
        entry.plan.missing = {
            KnowledgeRequirement{"actionability: " + reason_text, {Source::SituationModel}}};
        reason(out, "actionability-failure", {entry.plan.script_id, step.name}, reason_text);
        return std::nullopt;
    };

    Command cmd;
    cmd.name = step.name;
    for (const auto& [key, value] : step.params) {
        if (!value.empty() && value[0] == '$') {
            std::string var = value.substr(1);
            if (!entry.plan.bindings.contains(var)) return block("unbound variable $" + var);
            cmd.params[key] = entry.plan.bindings[var];
        } else {
            cmd.params[key] = value;
        }
    }
    if (cmd.name == "SEARCH" && entry.plan.bindings.contains("exclude"))
        cmd.params["exclude"] = entry.plan.bindings["exclude"];

    // actionability assessment: physical feasibility and immediate executability
    if (cmd.name == "PICKUP" && last_frame_ && last_frame_->gripper)
        return block("gripper occupied");
    if (cmd.name == "SEARCH") {
        std::string zone = cmd.params.value("zone", "");
        if (!fixture_->zone(zone)) return block("unknown zone " + zone);
        reason(out, "action-selected", {entry.plan.script_id, step.name},
               "SEARCH selected for go-to-object: the script encodes that the tactical layer "
               "must close the detection/stop loop; a strategic WAYPOINT+STOP would act on a "
               "stale frame");
    } else if (cmd.name == "WAYPOINT") {
        std::string wp = cmd.params.value("waypoint", "");
        if (!fixture_->waypoint(wp)) return block("unknown waypoint " + wp);
        reason(out, "action-selected", {entry.plan.script_id, step.name},
               "WAYPOINT to " + wp + " (stored path, no perception needed)");
    } else {
        reason(out, "action-selected", {entry.plan.script_id, step.name},
               cmd.name + " dispatched");
    }
    if (std::string err = validate_command(cmd); !err.empty()) return block(err);
    return cmd;
}

void OntoAgent::run_find_causes(AgendaEntry& entry, int tick, AgentOutput& out) {
    const Filler* themeRef = entry.goal.find("theme");
    const auto* ir = themeRef ? themeRef->get<InstanceRef>() : nullptr;
    const FrameInstance* symptom = ir ? situation_.find(ir->target) : nullptr;
    std::string symptom_concept = symptom ? symptom->id.concept_name : "";
    std::string inner = "";
    if (symptom) {
        if (const Filler* t = symptom->find("theme")) {
            if (const auto* tr = t->get<InstanceRef>()) inner = tr->target.concept_name;
            if (const auto* cr = t->get<ConceptRef>()) inner = cr->concept_name;
        }
    }

    auto causes = kb_->find_causes(symptom_concept, inner);
    std::vector<std::string> refs{entry.plan.script_id};
    for (const auto* link : causes) refs.push_back(link->id);
    reason(out, "diagnosis", refs,
           std::to_string(causes.size()) + " cause(s) found for " + symptom_concept + " of " +
               inner);

    Json result = Json::array();
    for (const auto* link : causes) result.push_back(link->id);
    Json tool;
    tool["tool"] = "FIND-CAUSES";
    tool["query"] = symptom_concept + "/" + inner;
    tool["result"] = result;
    out.tool_records.push_back(std::move(tool));

    last_hypotheses_.clear();
    last_hypothesis_refs_.clear();
    for (const auto* link : causes) {
        last_hypotheses_.push_back(link->cause_template);
        last_hypothesis_refs_.push_back(link->id);
        FrameInstance& sit = situation_.add(link->cause_template.id.concept_name, tick);
        sit.slots = link->cause_template.slots;
    }
    pending_report_ = build_diagnosis_gmr(causes);
    entry.plan.bindings["hypotheses"] = result;
}

void OntoAgent::run_searchlogs(AgendaEntry& entry, int tick, AgentOutput& out) {
    // hypothesis components: the first concept each cause template mentions
    std::vector<std::pair<std::string, std::string>> components;  // (CONCEPT, lowercase)
    if (last_hypotheses_.empty()) {
        // M3 can arrive without a prior diagnosis turn; derive the hypotheses now
        const Filler* themeRef = entry.goal.find("theme");
        const auto* ir = themeRef ? themeRef->get<InstanceRef>() : nullptr;
        const FrameInstance* symptom = ir ? situation_.find(ir->target) : nullptr;
        if (symptom) {
            std::string inner;
            if (const Filler* t = symptom->find("theme")) {
                if (const auto* tr = t->get<InstanceRef>()) inner = tr->target.concept_name;
            }
            for (const auto* link : kb_->find_causes(symptom->id.concept_name, inner)) {
                last_hypotheses_.push_back(link->cause_template);
                last_hypothesis_refs_.push_back(link->id);
            }
        }
    }
    for (const auto& h : last_hypotheses_) {
        for (const auto& slot : h.slots) {
            if (const auto* cr = slot.value.get<ConceptRef>()) {
                components.emplace_back(cr->concept_name, lower(cr->concept_name));
                break;
            }
        }
    }
    entry.plan.bindings["hypothesis-components"] = [&] {
        Json a = Json::array();
        for (const auto& [c, l] : components) a.push_back(l);
        return a;
    }();

    struct Confirmation {
        std::string concept_name;
        bool confirmed = false;
        std::string evidence;
    };
    std::vector<Confirmation> confirmations;

    for (size_t i = 0; i < components.size(); ++i) {
        const auto& [concept_name, query] = components[i];
        auto entries = kb_->search_logs(query);
        Json result = Json::array();
        for (const auto& e : entries)
            result.push_back(e.date.iso() + " " + e.component + " " + e.action + ": " + e.note);
        Json tool;
        tool["tool"] = "SEARCHLOGS";
        tool["query"] = query;
        tool["result"] = result;
        out.tool_records.push_back(std::move(tool));

        Confirmation c{concept_name, false, ""};
        const ServiceLogEntry* lifecycle = nullptr;
        for (const auto& e : entries)
            if (e.action.find("install") != std::string::npos ||
                e.action.find("replace") != std::string::npos)
                lifecycle = &e;
        if (lifecycle) {
            int age = months_between(lifecycle->date, fixture_->trial_date);
            bool cleared = !entries.empty() && clearance_note(entries.back().note);
            if (age >= 24 && !cleared) {
                c.confirmed = true;
                c.evidence = query + " installed " + lifecycle->date.iso() + " (" +
                             std::to_string(age) + " months ago)";
            }
        }
        confirmations.push_back(std::move(c));
    }

    std::vector<const Confirmation*> confirmed;
    for (const auto& c : confirmations)
        if (c.confirmed) confirmed.push_back(&c);

    if (confirmed.size() == 1) {
        std::vector<std::string> refs{entry.plan.script_id};
        size_t idx = static_cast<size_t>(confirmed[0] - confirmations.data());
        if (idx < last_hypothesis_refs_.size()) refs.push_back(last_hypothesis_refs_[idx]);
        reason(out, "log-analysis", refs,
               "service log supports replacement: " + confirmed[0]->evidence);
        FrameDocument gmr;
        FrameInstance rec{{"RECOMMEND-REPLACEMENT", 1}, {}, Provenance::Gmr, tick};
        rec.slots.push_back({"theme", make_concept_ref(confirmed[0]->concept_name)});
        gmr.frames.push_back(std::move(rec));
        pending_report_ = std::move(gmr);
    } else {
        reason(out, "log-analysis", {entry.plan.script_id},
               "log evidence inconclusive across " + std::to_string(components.size()) +
                   " component(s)");
        FrameDocument gmr;
        FrameInstance f{{"REPORT-INABILITY", 1}, {}, Provenance::Gmr, tick};
        f.slots.push_back({"reason", make_text("the service log is inconclusive")});
        gmr.frames.push_back(std::move(f));
        pending_report_ = std::move(gmr);
    }
}

void OntoAgent::say_gmr(const FrameDocument& gmr, std::string rule, std::vector<std::string> refs,
                        int tick, AgentOutput& out) {
    std::string text = templates_.gmr_to_utterance(gmr);
    reason(out, std::move(rule), std::move(refs), "say: " + text);
    out.utterances.push_back({text, render_frames(gmr)});
    (void)tick;
}

void OntoAgent::report_inability(const std::string& reason_text, std::vector<std::string> refs,
                                 int tick, AgentOutput& out) {
    FrameDocument gmr;
    FrameInstance f{{"REPORT-INABILITY", 1}, {}, Provenance::Gmr, tick};
    f.slots.push_back({"reason", make_text(reason_text)});
    gmr.frames.push_back(std::move(f));
    say_gmr(gmr, "inability-report", std::move(refs), tick, out);
}

}  // namespace deckhand
