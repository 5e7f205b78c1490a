#include <benchmark/benchmark.h>

#include "ftsvd/baselines.hpp"
#include "ftsvd/ftsvd.hpp"
#include "ftsvd/simulate.hpp"

using namespace ftsvd;

namespace {

Simulation make_data(std::size_t p1, std::size_t p2, std::size_t n, std::size_t r = 1) {
    SimConfig cfg;
    cfg.p1 = p1;
    cfg.p2 = p2;
    cfg.n = n;
    cfg.r = r;
    cfg.lambda_min = 80.0;
    cfg.sigma = 1.0;
    cfg.tau = 1.0;
    cfg.seed = 7;
    return simulate(cfg);
}

void BM_ContractAB(benchmark::State& state) {
    const auto s = make_data(std::size_t(state.range(0)), std::size_t(state.range(0)), 50);
    const auto& c = s.truth.components[0];
    for (auto _ : state) benchmark::DoNotOptimize(contract_ab(s.data.y, c.a, c.b));
    state.SetItemsProcessed(state.iterations() * std::int64_t(s.data.y.size()));
}
BENCHMARK(BM_ContractAB)->Arg(20)->Arg(100)->Arg(300);

void BM_FitWeightedMean(benchmark::State& state) {
    const auto s = make_data(20, 20, std::size_t(state.range(0)));
    const auto& c = s.truth.components[0];
    for (auto _ : state) benchmark::DoNotOptimize(fit_weighted_mean(s.data.y, c.a, c.b, s.data.grid));
}
BENCHMARK(BM_FitWeightedMean)->Arg(30)->Arg(100)->Arg(400);

void BM_SpectralInit(benchmark::State& state) {
    const auto s = make_data(20, std::size_t(state.range(0)), 30);
    for (auto _ : state) benchmark::DoNotOptimize(spectral_init(s.data.y));
}
BENCHMARK(BM_SpectralInit)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_PowerIteration(benchmark::State& state) {
    const auto s = make_data(20, std::size_t(state.range(0)), 30);
    const auto init = spectral_init(s.data.y);
    FitConfig cfg;
    cfg.tol = 1e-300;
    for (auto _ : state) benchmark::DoNotOptimize(power_iteration(s.data.y, s.data.grid, init.a, init.b, cfg));
}
BENCHMARK(BM_PowerIteration)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_SequentialDecompose(benchmark::State& state) {
    const auto r = std::size_t(state.range(0));
    const auto s = make_data(100, 100, 30, r);
    FitConfig cfg;
    cfg.rank = r;
    for (auto _ : state) benchmark::DoNotOptimize(sequential_decompose(s.data.y, s.data.grid, cfg));
}
BENCHMARK(BM_SequentialDecompose)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_CpDecompose(benchmark::State& state) {
    const auto s = make_data(20, 500, 30);
    CpConfig cc;
    for (auto _ : state) benchmark::DoNotOptimize(cp_decompose(s.data.y, cc));
}
BENCHMARK(BM_CpDecompose)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
