#include <doctest.h>

#include <deque>
#include <set>

#include "deckhand/fixtures.hpp"
#include "deckhand/knowledge.hpp"

using namespace deckhand;

namespace {

KnowledgeBase canonical_kb() {
    return KnowledgeBase::load(fixtures::ontology_text(), fixtures::scripts_text(),
                               fixtures::service_log_text());
}

// independent oracle: exhaustive BFS over cause links
std::vector<std::string> bfs_cause_ids(const KnowledgeBase& kb, const std::string& symptom,
                                       const std::string& theme) {
    std::vector<std::string> out;
    std::set<std::string> seen_links, visited;
    std::deque<std::string> queue{symptom};
    visited.insert(symptom);
    bool first = true;
    while (!queue.empty()) {
        std::string cur = queue.front();
        queue.pop_front();
        const Concept* c = kb.find_concept(cur);
        if (!c) continue;
        for (const auto& link : c->causal_links) {
            if (first && link.applicability && *link.applicability != theme) continue;
            if (!seen_links.insert(link.id).second) continue;
            out.push_back(link.id);
            if (visited.insert(link.cause_template.id.concept_name).second)
                queue.push_back(link.cause_template.id.concept_name);
        }
        first = false;
    }
    return out;
}

}  // namespace

TEST_CASE("canonical knowledge loads with resolved cross references") {
    KnowledgeBase kb = canonical_kb();
    const Concept* overheat = kb.find_concept("OVERHEAT");
    REQUIRE(overheat != nullptr);
    CHECK(overheat->causal_links.size() == 2);
    CHECK(overheat->causal_links[0].cause_template.id.concept_name == "OBSTRUCT");
    CHECK(overheat->causal_links[1].cause_template.id.concept_name == "STATE-OF-REPAIR");
    CHECK(kb.is_a("ENGINE", "MACHINE"));
    CHECK(kb.is_a("LEIA", "ROBOT"));
    CHECK_FALSE(kb.is_a("ENGINE", "ZONE"));
}

TEST_CASE("empty scripts section loads") {
    KnowledgeBase kb =
        KnowledgeBase::load(fixtures::ontology_text(), "", fixtures::service_log_text());
    CHECK(kb.scripts().empty());
}

TEST_CASE("is-a cycle rejected") {
    CHECK_THROWS_AS(KnowledgeBase::load("@A\n  IS-A B\n@B\n  IS-A A\n", "", ""), KnowledgeError);
}

TEST_CASE("dangling references rejected") {
    CHECK_THROWS_AS(KnowledgeBase::load("@A\n  IS-A MISSING\n", "", ""), KnowledgeError);
    CHECK_THROWS_AS(KnowledgeBase::load("@A\n  CAUSED-BY NOPE(theme @A)\n", "", ""),
                    KnowledgeError);
}

TEST_CASE("find_causes matches the canonical trace") {
    KnowledgeBase kb = canonical_kb();
    auto causes = kb.find_causes("OVERHEAT", "ENGINE");
    REQUIRE(causes.size() == 2);
    CHECK(causes[0]->cause_template.id.concept_name == "OBSTRUCT");
    CHECK(causes[0]->cause_template.find("theme")->get<ConceptRef>()->concept_name == "PIPE");
    CHECK(causes[1]->cause_template.id.concept_name == "STATE-OF-REPAIR");
    CHECK(causes[1]->cause_template.find("range")->get<Comparison>()->value == 0.7);

    SUBCASE("applicability filters by theme") {
        CHECK(kb.find_causes("OVERHEAT", "PUMP").empty());
    }
    SUBCASE("pure function: repeated calls identical") {
        auto again = kb.find_causes("OVERHEAT", "ENGINE");
        REQUIRE(again.size() == causes.size());
        for (size_t i = 0; i < again.size(); ++i) CHECK(again[i]->id == causes[i]->id);
    }
    SUBCASE("unknown symptom throws") {
        CHECK_THROWS_AS(kb.find_causes("NOT-A-CONCEPT", "ENGINE"), KnowledgeError);
    }
    SUBCASE("is-a inheritance is opt-in") {
        KnowledgeBase kb2 = KnowledgeBase::load(
            "@MACHINE\n@ENGINE\n  IS-A MACHINE\n@LEAK\n"
            "@FAIL\n  CAUSED-BY LEAK IF-THEME MACHINE\n",
            "", "");
        CHECK(kb2.find_causes("FAIL", "ENGINE").empty());
        CHECK(kb2.find_causes("FAIL", "ENGINE", {true}).size() == 1);
    }
}

TEST_CASE("transitive cause closure equals the BFS oracle") {
    // depth-2 chain: A caused-by B-EVENT, B-EVENT caused-by C-EVENT
    KnowledgeBase kb = KnowledgeBase::load(
        "@THING\n"
        "@A\n  CAUSED-BY B-EVENT(theme @THING)\n"
        "@B-EVENT\n  CAUSED-BY C-EVENT(theme @THING)\n"
        "@C-EVENT\n",
        "", "");
    auto direct = kb.find_causes("A", "THING");
    CHECK(direct.size() == 1);

    auto closure = kb.find_causes_transitive("A", "THING");
    auto oracle = bfs_cause_ids(kb, "A", "THING");
    REQUIRE(closure.size() == oracle.size());
    for (size_t i = 0; i < closure.size(); ++i) CHECK(closure[i]->id == oracle[i]);
    CHECK(closure.size() == 2);

    KnowledgeBase canon = canonical_kb();
    auto canon_closure = canon.find_causes_transitive("OVERHEAT", "ENGINE");
    auto canon_oracle = bfs_cause_ids(canon, "OVERHEAT", "ENGINE");
    REQUIRE(canon_closure.size() == canon_oracle.size());
    for (size_t i = 0; i < canon_closure.size(); ++i) CHECK(canon_closure[i]->id == canon_oracle[i]);
}

TEST_CASE("script lookup by goal") {
    KnowledgeBase kb = canonical_kb();
    const Script* diag = kb.script_for_goal("HYPOTHESIZE-MECHANICAL-PROBLEM-CAUSE");
    REQUIRE(diag != nullptr);
    REQUIRE(diag->steps.size() == 2);
    CHECK(diag->steps[0].kind == StepKind::Tool);
    CHECK(diag->steps[0].name == "FIND-CAUSES");
    CHECK(diag->steps[1].kind == StepKind::Speech);

    const Script* fetch = kb.script_for_goal("FETCH");
    REQUIRE(fetch != nullptr);
    REQUIRE(fetch->preconditions.size() == 2);
    CHECK(fetch->preconditions[0].subject == "features-of-theme");
    CHECK(fetch->preconditions[1].subject == "location-of-theme");
    std::vector<std::string> names;
    for (const auto& s : fetch->steps) names.push_back(s.name);
    CHECK(names == std::vector<std::string>{"SEARCH", "PICKUP", "WAYPOINT", "DROPOBJECT"});

    CHECK(kb.script_for_goal("UNKNOWN-GOAL") == nullptr);
}

TEST_CASE("exactly one metascript per requirement kind") {
    KnowledgeBase kb = canonical_kb();
    CHECK(kb.metascript_for("features-of-theme") != nullptr);
    CHECK(kb.metascript_for("location-of-theme") != nullptr);
    CHECK(kb.metascript_for("no-such-requirement") == nullptr);
    CHECK_THROWS_AS(
        KnowledgeBase::load("@X\n",
                            "METASCRIPT A\n  RESOLVES k\nMETASCRIPT B\n  RESOLVES k\n", ""),
        KnowledgeError);
}

TEST_CASE("unbound step variables rejected at load") {
    CHECK_THROWS_AS(KnowledgeBase::load("@G\n  IS-A ALL\n@ALL\n",
                                        "SCRIPT S\n  GOAL G\n  STEP COMMAND SEARCH zone=$nope\n",
                                        ""),
                    KnowledgeError);
}

TEST_CASE("service log search") {
    KnowledgeBase kb = canonical_kb();
    SUBCASE("empty query returns all 16 in date order") {
        auto all = kb.search_logs("");
        REQUIRE(all.size() == 16);
        for (size_t i = 1; i < all.size(); ++i) CHECK_FALSE(all[i].date < all[i - 1].date);
    }
    SUBCASE("substring oracle") {
        // independent scan over the raw fixture text
        auto oracle_count = [](std::string_view needle) {
            std::string text(fixtures::service_log_text());
            int n = 0;
            size_t pos = 0;
            std::string line;
            while (pos <= text.size()) {
                size_t eol = text.find('\n', pos);
                line = text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
                std::transform(line.begin(), line.end(), line.begin(), ::tolower);
                if (!line.empty() && line.find(needle) != std::string::npos) ++n;
                if (eol == std::string::npos) break;
                pos = eol + 1;
            }
            return n;
        };
        CHECK(static_cast<int>(kb.search_logs("thermostat").size()) == oracle_count("thermostat"));
        CHECK(static_cast<int>(kb.search_logs("pipe").size()) == oracle_count("pipe"));
        CHECK(kb.search_logs("thermostat").size() == 3);
    }
    SUBCASE("absent term") { CHECK(kb.search_logs("warp-drive").empty()); }
    SUBCASE("case insensitive") {
        CHECK(kb.search_logs("THERMOSTAT").size() == kb.search_logs("thermostat").size());
    }
}

TEST_CASE("service log supports the replacement conclusion") {
    KnowledgeBase kb = canonical_kb();
    Date trial = parse_date("2025-07-15");
    const ServiceLogEntry* install = nullptr;
    for (const auto& e : kb.log())
        if (e.component == "thermostat" && e.action == "installed") install = &e;
    REQUIRE(install != nullptr);
    CHECK(months_between(install->date, trial) >= 24);
}

TEST_CASE("episodic store") {
    EpisodicStore store;
    SUBCASE("empty lookup is absent") {
        FrameInstance pattern{{"THERMOSTAT", 1}, {}, Provenance::Situation, 0};
        CHECK_FALSE(store.lookup(pattern).has_value());
    }
    SUBCASE("most recent record wins, oracle = linear max-timestamp scan") {
        auto rec = [](int t, const char* where) {
            FrameInstance f{{"THERMOSTAT", 1}, {}, Provenance::Situation, t};
            f.slots.push_back({"located-in", make_concept_ref(where)});
            return EpisodicRecord{t, f};
        };
        store.append(rec(5, "ENGINE-ROOM"));
        store.append(rec(9, "STORES-ZONE"));
        FrameInstance pattern{{"THERMOSTAT", 1}, {}, Provenance::Situation, 0};
        pattern.slots.push_back({"located-in", Filler{Wildcard{}}});
        auto found = store.lookup(pattern);
        REQUIRE(found.has_value());
        // oracle: max timestamp among matches
        int best = -1;
        for (const auto& r : store.records()) best = std::max(best, r.timestamp);
        CHECK(found->timestamp == best);
        CHECK(found->content.find("located-in")->get<ConceptRef>()->concept_name == "STORES-ZONE");
    }
    SUBCASE("equal timestamps: later store order wins") {
        auto rec = [](int t, const char* where) {
            FrameInstance f{{"PUMP", 1}, {}, Provenance::Situation, t};
            f.slots.push_back({"located-in", make_concept_ref(where)});
            return EpisodicRecord{t, f};
        };
        store.append(rec(4, "CORRIDOR"));
        store.append(rec(4, "STORES-ZONE"));
        FrameInstance pattern{{"PUMP", 1}, {}, Provenance::Situation, 0};
        auto found = store.lookup(pattern);
        REQUIRE(found.has_value());
        CHECK(found->content.find("located-in")->get<ConceptRef>()->concept_name == "STORES-ZONE");
    }
    SUBCASE("timestamp regression rejected") {
        store.append(EpisodicRecord{7, FrameInstance{{"PIPE", 1}, {}, Provenance::Situation, 7}});
        CHECK_THROWS_AS(
            store.append(EpisodicRecord{3, FrameInstance{{"PIPE", 2}, {}, Provenance::Situation, 3}}),
            KnowledgeError);
    }
}

TEST_CASE("knowledge round trip: load(render(kb)) == kb") {
    KnowledgeBase kb = canonical_kb();
    KnowledgeTexts texts = render_knowledge(kb);
    KnowledgeBase again = KnowledgeBase::load(texts.ontology, texts.scripts, texts.log);
    CHECK(again == kb);
}
