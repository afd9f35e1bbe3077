// Parallel replicate kernel against the serial per-alpha reference.

#include <benchmark/benchmark.h>

#include "parunc/harness.hpp"

using namespace parunc;

namespace {

PortfolioSpec single() {
    PortfolioSpec s;
    s.subrisks = {{0.0, 1.0, 10}};
    s.mean_mode = MeanMode::known_zero;
    s.estimator_mode = EstimatorMode::known_mean_mle;
    return s;
}

PortfolioSpec pair() {
    PortfolioSpec s;
    s.subrisks = {{0.0, 1.0, 5}, {0.0, 0.1, 10}};
    s.mean_mode = MeanMode::estimated;
    s.estimator_mode = EstimatorMode::unbiased;
    return s;
}

ExperimentConfig config(bool aggregate, int workers) {
    ExperimentConfig c;
    c.n_outer = 400;
    c.n_inner = 10000;
    c.workers = workers;
    if (aggregate) c.aggregation = AggregationMode{Combine::sum_corrected, WeightSource::estimated_lambda};
    return c;
}

void BM_KernelSingle(benchmark::State& state) {
    const auto spec = single();
    const auto cfg = config(false, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(solvency_probabilities(spec, cfg));
    state.SetItemsProcessed(state.iterations() * cfg.n_outer * cfg.n_inner);
}

void BM_ReferenceSingle(benchmark::State& state) {
    const auto spec = single();
    const auto cfg = config(false, 1);
    for (auto _ : state) benchmark::DoNotOptimize(solvency_probabilities_reference(spec, cfg));
    state.SetItemsProcessed(state.iterations() * cfg.n_outer * cfg.n_inner);
}

void BM_KernelCorrected(benchmark::State& state) {
    const auto spec = pair();
    const auto cfg = config(true, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(solvency_probabilities(spec, cfg));
    state.SetItemsProcessed(state.iterations() * cfg.n_outer * cfg.n_inner);
}

void BM_ReferenceCorrected(benchmark::State& state) {
    const auto spec = pair();
    const auto cfg = config(true, 1);
    for (auto _ : state) benchmark::DoNotOptimize(solvency_probabilities_reference(spec, cfg));
    state.SetItemsProcessed(state.iterations() * cfg.n_outer * cfg.n_inner);
}

}  // namespace

BENCHMARK(BM_KernelSingle)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ReferenceSingle)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_KernelCorrected)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ReferenceCorrected)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
