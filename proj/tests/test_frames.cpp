#include <doctest.h>

#include <random>

#include "deckhand/frames.hpp"

using namespace deckhand;

namespace {

// The canonical listing corpus: frame documents in the notation, including
// the markup-wrapped forms they circulate in. The parser must take all of
// them unmodified.
const char* kTmrProblemReport = R"(\textbf{#DESCRIBE-MECHANICAL-PROBLEM.1}
 agent       #HUMAN.1    //Speaker
 beneficiary #LEIA.1     //Robot
 theme       #OVERHEAT.1 //Overheating issue
\textbf{#OVERHEAT.1}
 theme      #ENGINE.1  //Engine is what is overheating
\textbf{#ENGINE.1}
 corefer   ->ENGINE.1  //That specific engine in the room
)";

const char* kPlanListing = R"(\textbf{Plan.1}
 \textbf{#HYPOTHESIZE-MECHANICAL-PROBLEM-CAUSE.1}
   agent       #LEIA.1     //The agent will respond
   beneficiary #HUMAN.1    //to the speaker
   theme       #OVERHEAT.1 //about engine's temperature
   *take-this-action "search ontology for causes;
                      report."
)";

const char* kGmrAlternative = R"(\textbf{#ALTERNATIVE.1}      //It might be either of two options
 domain #MODALITY.1
 range  #MODALITY.2
\textbf{#MODALITY.1}         //that a pipe is obstructed
 type   EPISTEMIC
 value  0.5
 scope  #OBSTRUCT.1
\textbf{#MODALITY.2}         //or the thermostat is broken
 type   EPISTEMIC
 value  0.5
 scope  #STATE-OF-REPAIR.1
\textbf{#OBSTRUCT.1}
 theme  @PIPE
\textbf{#STATE-OF-REPAIR.1}
 domain @THERMOSTAT
 range  <0.7 \hfill \textbf{\textcolor{blue}{The GMR for M2 (Problem Identification)}}
)";

const char* kTmrFetchRequest = R"(\textbf{#REQUEST-ACTION-FETCH.1}
 agent       #HUMAN.1     //Speaker asks
 beneficiary #LEIA.1      //Listener to fetch
 theme       #THERMOSTAT.1//a thermostat
\textbf{#THERMOSTAT.1}
 age        0.0001<>0.1   //thats new.
)";

FrameDocument roundtrip(const FrameDocument& d) { return parse_frames(render_frames(d)); }

}  // namespace

TEST_CASE("listing corpus parses unmodified") {
    FrameDocument tmr = parse_frames(kTmrProblemReport);
    CHECK(tmr.frames.size() == 3);
    CHECK(tmr.frames[0].id.concept_name == "DESCRIBE-MECHANICAL-PROBLEM");
    const Filler* agent = tmr.frames[0].find("agent");
    REQUIRE(agent != nullptr);
    CHECK(agent->get<InstanceRef>()->target.str() == "HUMAN.1");
    const Filler* corefer = tmr.frames[2].find("corefer");
    REQUIRE(corefer != nullptr);
    CHECK(corefer->get<CoRef>()->target.str() == "ENGINE.1");

    FrameDocument plan = parse_frames(kPlanListing);
    REQUIRE(plan.label.has_value());
    CHECK(*plan.label == "Plan.1");
    REQUIRE(plan.frames.size() == 1);
    const Filler* directive = plan.frames[0].find("*take-this-action");
    REQUIRE(directive != nullptr);
    CHECK(directive->get<Directive>()->text == "search ontology for causes; report.");

    FrameDocument gmr = parse_frames(kGmrAlternative);
    CHECK(gmr.frames.size() == 5);
    CHECK(gmr.frames[0].id.concept_name == "ALTERNATIVE");
    const Filler* domain = gmr.frames[0].find("domain");
    REQUIRE(domain != nullptr);
    CHECK(domain->get<InstanceRef>()->target.str() == "MODALITY.1");
    CHECK(gmr.frames[1].find("value")->get<Number>()->value == 0.5);
    CHECK(gmr.frames[3].find("theme")->get<ConceptRef>()->concept_name == "PIPE");
    const Filler* range = gmr.frames[4].find("range");
    REQUIRE(range != nullptr);
    CHECK(range->get<Comparison>()->op == CompareOp::Less);
    CHECK(range->get<Comparison>()->value == 0.7);

    FrameDocument fetch = parse_frames(kTmrFetchRequest);
    CHECK(fetch.frames.size() == 2);
    const Filler* age = fetch.frames[1].find("age");
    REQUIRE(age != nullptr);
    CHECK(age->get<NumericRange>()->lo == 0.0001);
    CHECK(age->get<NumericRange>()->hi == 0.1);
}

TEST_CASE("listing corpus round-trips structurally") {
    for (const char* text :
         {kTmrProblemReport, kPlanListing, kGmrAlternative, kTmrFetchRequest}) {
        FrameDocument d = parse_frames(text);
        CHECK(roundtrip(d) == d);
    }
}

TEST_CASE("empty document") {
    FrameDocument d = parse_frames("");
    CHECK(d.frames.empty());
    CHECK(render_frames(d) == "");
    CHECK(roundtrip(d) == d);
}

TEST_CASE("parse errors carry location") {
    SUBCASE("duplicate instance id") {
        CHECK_THROWS_AS(parse_frames("#A.1\n#A.1\n"), ParseError);
    }
    SUBCASE("slot before header") {
        try {
            parse_frames("  agent #HUMAN.1\n");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line == 1);
        }
    }
    SUBCASE("bad filler") {
        CHECK_THROWS_AS(parse_frames("#A.1\n  x ->broken\n"), ParseError);
    }
    SUBCASE("unterminated quote") {
        CHECK_THROWS_AS(parse_frames("#A.1\n  x \"abc\n"), ParseError);
    }
    SUBCASE("range lo greater than hi") {
        CHECK_THROWS_AS(parse_frames("#A.1\n  x 2<>1\n"), ParseError);
    }
}

TEST_CASE("strict reference checking") {
    const char* text = "#A.1\n  other #B.7\n";
    CHECK_NOTHROW(parse_frames(text));  // lenient default keeps external refs symbolic
    CHECK_THROWS_AS(parse_frames(text, ParseOptions{true, {}}), ParseError);
    ParseOptions opts;
    opts.strict_refs = true;
    opts.known_instances = {{"B", 7}};
    CHECK_NOTHROW(parse_frames(text, opts));
}

TEST_CASE("filler satisfaction") {
    CHECK(filler_satisfies(make_number(0.05), make_range(0.0001, 0.1)));
    CHECK_FALSE(filler_satisfies(make_number(0.9), make_range(0.0001, 0.1)));
    CHECK(filler_satisfies(make_number(0.5), Filler{Comparison{CompareOp::Less, 0.7}}));
    CHECK(filler_satisfies(make_text("grey"), make_text("grey")));
    CHECK(filler_satisfies(make_concept_ref("PIPE"), Filler{Wildcard{}}));
}

TEST_CASE("equality modulo instance indices") {
    FrameDocument a = parse_frames("#X.3\n  theme #Y.9\n#Y.9\n  value 1\n");
    FrameDocument b = parse_frames("#X.1\n  theme #Y.1\n#Y.1\n  value 1\n");
    CHECK(equal_modulo_indices(a, b));
    FrameDocument c = parse_frames("#X.1\n  theme #Y.1\n#Y.1\n  value 2\n");
    CHECK_FALSE(equal_modulo_indices(a, c));
}

namespace {

// random well-formed closed documents for the round-trip property
FrameDocument generate_document(std::mt19937& rng) {
    auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
    static const std::vector<std::string> concepts = {"ALPHA", "BETA-GAMMA", "DELTA", "E-2",
                                                      "ZETA"};
    static const std::vector<std::string> slots = {"agent", "theme", "value", "scope", "range",
                                                   "note", "corefer"};
    FrameDocument doc;
    int frame_count = 1 + pick(5);
    std::vector<InstanceId> ids;
    for (int f = 0; f < frame_count; ++f) {
        std::string concept_name = concepts[pick(static_cast<int>(concepts.size()))];
        int index = 1;
        for (const auto& id : ids)
            if (id.concept_name == concept_name) index = std::max(index, id.index + 1);
        ids.push_back({concept_name, index});
        doc.frames.push_back(FrameInstance{ids.back(), {}, Provenance::Situation, 0});
    }
    for (auto& frame : doc.frames) {
        int slot_count = pick(5);
        for (int s = 0; s < slot_count; ++s) {
            std::string name = slots[pick(static_cast<int>(slots.size()))];
            Filler value;
            switch (pick(8)) {
                case 0: value = Filler{InstanceRef{ids[pick(static_cast<int>(ids.size()))]}}; break;
                case 1: value = Filler{CoRef{ids[pick(static_cast<int>(ids.size()))]}}; break;
                case 2: value = make_concept_ref(concepts[pick(5)]); break;
                case 3: {
                    double lo = pick(1000) / 64.0;
                    double hi = lo + pick(1000) / 64.0;
                    value = make_range(lo, hi);
                    break;
                }
                case 4: {
                    CompareOp op = static_cast<CompareOp>(pick(4));
                    value = Filler{Comparison{op, pick(2000) / 128.0 - 4.0}};
                    break;
                }
                case 5: value = make_number(pick(1000000) / 977.0 - 300.0); break;
                case 6: value = make_text(pick(2) ? "EPISTEMIC" : "word like this (quoted)"); break;
                default: value = Filler{Wildcard{}}; break;
            }
            if (name == "corefer") value = Filler{CoRef{ids[pick(static_cast<int>(ids.size()))]}};
            frame.slots.push_back({name, value});
        }
        if (pick(6) == 0)
            frame.slots.push_back({"*take-this-action", Filler{Directive{"do the thing; stop."}}});
    }
    return doc;
}

}  // namespace

TEST_CASE("round trip holds on 500 generated documents") {
    std::mt19937 rng(20250810);
    for (int i = 0; i < 500; ++i) {
        FrameDocument doc = generate_document(rng);
        FrameDocument back = roundtrip(doc);
        REQUIRE(back == doc);
    }
}

TEST_CASE("numbers render shortest and reparse exactly") {
    for (double v : {0.5, 0.0001, 0.1, 1.0, -3.25, 1e-5, 123456.789}) {
        Filler f = make_number(v);
        FrameDocument d;
        d.frames.push_back(FrameInstance{{"N", 1}, {{"value", f}}, Provenance::Situation, 0});
        CHECK(roundtrip(d) == d);
    }
}
