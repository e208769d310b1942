#include <benchmark/benchmark.h>

#include "deckhand/coding.hpp"
#include "deckhand/fixtures.hpp"
#include "deckhand/runner.hpp"
#include "deckhand/stats.hpp"

using namespace deckhand;

namespace {

const char* kGmrListing =
    "#ALTERNATIVE.1\n  domain #MODALITY.1\n  range #MODALITY.2\n"
    "#MODALITY.1\n  type EPISTEMIC\n  value 0.5\n  scope #OBSTRUCT.1\n"
    "#MODALITY.2\n  type EPISTEMIC\n  value 0.5\n  scope #STATE-OF-REPAIR.1\n"
    "#OBSTRUCT.1\n  theme @PIPE\n"
    "#STATE-OF-REPAIR.1\n  domain @THERMOSTAT\n  range <0.7\n";

void BM_ParseFrames(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(parse_frames(kGmrListing));
}
BENCHMARK(BM_ParseFrames);

void BM_RenderRoundTrip(benchmark::State& state) {
    FrameDocument doc = parse_frames(kGmrListing);
    for (auto _ : state) benchmark::DoNotOptimize(parse_frames(render_frames(doc)));
}
BENCHMARK(BM_RenderRoundTrip);

void BM_LoadKnowledge(benchmark::State& state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(KnowledgeBase::load(
            fixtures::ontology_text(), fixtures::scripts_text(), fixtures::service_log_text()));
}
BENCHMARK(BM_LoadKnowledge);

void BM_FisherExact30(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(stats::fisher_exact({17, 13, 28, 2}));
}
BENCHMARK(BM_FisherExact30);

void BM_MannWhitneyExact(benchmark::State& state) {
    std::vector<double> a{0, 1, 2, 1, 0, 3}, b{2, 3, 1, 4, 2, 2};
    for (auto _ : state) benchmark::DoNotOptimize(stats::mann_whitney_u(a, b));
}
BENCHMARK(BM_MannWhitneyExact);

void BM_ReferenceTrial(benchmark::State& state) {
    KnowledgeBase kb = KnowledgeBase::load(fixtures::ontology_text(), fixtures::scripts_text(),
                                           fixtures::service_log_text());
    ScenarioFixture fx = canonical_fixture();
    RunConfig config;
    config.agent = "ontoagent";
    config.trials = 1;
    for (auto _ : state) benchmark::DoNotOptimize(run_trial(config, fx, kb, 0));
}
BENCHMARK(BM_ReferenceTrial);

void BM_CodeTrial(benchmark::State& state) {
    KnowledgeBase kb = KnowledgeBase::load(fixtures::ontology_text(), fixtures::scripts_text(),
                                           fixtures::service_log_text());
    ScenarioFixture fx = canonical_fixture();
    RunConfig config;
    config.agent = "ontoagent";
    config.trials = 1;
    TrialResult result = run_trial(config, fx, kb, 0);
    GroundTruth truth{&fx, &kb};
    for (auto _ : state) benchmark::DoNotOptimize(code_trial(result.transcript, truth));
}
BENCHMARK(BM_CodeTrial);

}  // namespace

BENCHMARK_MAIN();
