#include <vector>

#include <benchmark/benchmark.h>

#include "itscale/det_equiv.hpp"
#include "itscale/evt.hpp"
#include "itscale/gen_error.hpp"
#include "itscale/posterior.hpp"

using namespace itscale;

namespace {

ModelConfig base_config(int d, int n) {
    ModelConfig cfg;
    cfg.d = d;
    cfg.n = n;
    return cfg;
}

void BM_SolveRidgeIsotropic(benchmark::State& state) {
    const ModelConfig cfg = base_config(10, 10000);
    for (auto _ : state) benchmark::DoNotOptimize(solve_ridge(cfg));
}
BENCHMARK(BM_SolveRidgeIsotropic);

void BM_SolveRidgeSpectrum(benchmark::State& state) {
    std::vector<double> spectrum(state.range(0));
    for (std::size_t i = 0; i < spectrum.size(); ++i) spectrum[i] = 0.5 + double(i) / spectrum.size();
    for (auto _ : state) benchmark::DoNotOptimize(solve_ridge(0.3, 0.1, 1.0, spectrum));
}
BENCHMARK(BM_SolveRidgeSpectrum)->Arg(10)->Arg(100)->Arg(1000);

void BM_FitPosterior(benchmark::State& state) {
    const ModelConfig cfg = base_config(int(state.range(0)), int(state.range(1)));
    SplitMix64 trng = make_stream(1, stream::kTeacher);
    const WeightVector w = sample_teacher(cfg, trng);
    SplitMix64 drng = make_stream(1, stream::kData);
    const Dataset data = generate_dataset(cfg, w, drng);
    for (auto _ : state) benchmark::DoNotOptimize(fit_posterior(data, cfg));
}
BENCHMARK(BM_FitPosterior)->Args({10, 10000})->Args({50, 5000});

// Candidate draws per second through the (k, T) sweep kernel.
void BM_SweepDelta(benchmark::State& state) {
    const int k = int(state.range(0));
    const int n_temps = int(state.range(1));
    const ModelConfig cfg = base_config(10, 10000);
    const Experiment exp(cfg, MomentMode::det_equiv, 64, 1, 1, 1);
    const std::vector<TestPoint> pts = exp.bind(RewardSpec::radial(10.0));
    std::vector<double> temps;
    for (int i = 0; i < n_temps; ++i) temps.push_back(i * 1e-7);
    const SweepGrid grid{{k}, temps};
    const int n_inner = 16;
    for (auto _ : state) benchmark::DoNotOptimize(sweep_delta(pts, grid, n_inner, 1, 1));
    state.SetItemsProcessed(state.iterations() * std::int64_t(pts.size()) * n_inner * k);
}
BENCHMARK(BM_SweepDelta)->Args({50, 1})->Args({50, 8})->Args({1000, 1})->Unit(benchmark::kMillisecond);

void BM_MinChisq(benchmark::State& state) {
    const int k = int(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(min_chisq_mc(1.0, k, 1000, 1, 1));
    state.SetItemsProcessed(state.iterations() * 1000 * std::int64_t(k));
}
BENCHMARK(BM_MinChisq)->Arg(100)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
