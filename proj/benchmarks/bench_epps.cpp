#include <benchmark/benchmark.h>

#include <vector>

#include "epps/async_theory.hpp"
#include "epps/estimation.hpp"
#include "epps/filtering.hpp"
#include "epps/fitting.hpp"
#include "epps/sampling.hpp"

using namespace epps;

namespace {

ModelPair exp_pair() {
    return ModelPair(CorrelationModel::exponential(0.3, 8.0), CorrelationModel::brownian(1.0),
                     CorrelationModel::brownian(1.0));
}

// One simulated day of previous-tick increments at a 1 s grid.
std::vector<std::vector<double>> day_increments(std::size_t T, double lambda, std::uint32_t asset) {
    const PathSimulator sim(exp_pair(), 1.0, static_cast<double>(T), 100.0);
    const auto path = sim.simulate(7, 0);
    const auto ticks = draw_poisson_times(lambda, static_cast<double>(T), 100.0, 7, asset, 0);
    return {previous_tick(path, asset, ticks, 1.0, 0.0, static_cast<double>(T)).increments()};
}

}  // namespace

static void BM_AsyncCovariance(benchmark::State& state) {
    const auto model = CorrelationModel::exponential(0.3, 4.0, 1.5);
    const AsyncKernel k{1.0, 0.2};
    double dt = 1.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(async_covariance(model, k, dt));
        dt = dt < 100.0 ? dt * 1.1 : 1.0;
    }
}
BENCHMARK(BM_AsyncCovariance);

static void BM_SimulateDay(benchmark::State& state) {
    const auto T = static_cast<double>(state.range(0));
    const PathSimulator sim(exp_pair(), 0.1, T, 100.0);
    std::uint32_t day = 0;
    for (auto _ : state) benchmark::DoNotOptimize(sim.simulate(1, day++));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(T / 0.1));
}
BENCHMARK(BM_SimulateDay)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);

static void BM_PreviousTick(benchmark::State& state) {
    const double T = 20000.0;
    const PathSimulator sim(exp_pair(), 0.1, T, 100.0);
    const auto path = sim.simulate(3, 0);
    const auto ticks = draw_poisson_times(0.5, T, 100.0, 3, 0, 0);
    for (auto _ : state) benchmark::DoNotOptimize(previous_tick(path, 0, ticks, 1.0, 0.0, T));
}
BENCHMARK(BM_PreviousTick)->Unit(benchmark::kMicrosecond);

static void BM_EstimateSpectrum(benchmark::State& state) {
    const auto T = static_cast<std::size_t>(state.range(0));
    const auto x = day_increments(T, 0.5, 0);
    const auto y = day_increments(T, 0.05, 1);
    for (auto _ : state) benchmark::DoNotOptimize(estimate_spectrum(x, y, T));
}
BENCHMARK(BM_EstimateSpectrum)->Arg(4096)->Arg(20000)->Arg(20011)->Unit(benchmark::kMicrosecond);

static void BM_Correlogram(benchmark::State& state) {
    const std::size_t T = 20000;
    const auto x = day_increments(T, 0.5, 0);
    const auto y = day_increments(T, 0.05, 1);
    const auto max_lag = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(correlogram(x, y, max_lag));
}
BENCHMARK(BM_Correlogram)->Arg(40)->Arg(120)->Unit(benchmark::kMicrosecond);

static void BM_WienerFilter(benchmark::State& state) {
    const std::size_t T = 20000;
    const auto S = estimate_spectrum(day_increments(T, 0.5, 0), day_increments(T, 0.05, 1), T);
    const FilterSpec spec;
    for (auto _ : state) benchmark::DoNotOptimize(wiener_filter(S, 0.5, 0.05, spec));
}
BENCHMARK(BM_WienerFilter)->Unit(benchmark::kMicrosecond);

static void BM_FitCrossAsync(benchmark::State& state) {
    Correlogram cg;
    cg.n_days = 20;
    for (int m = -120; m <= 120; ++m) {
        const double tau = m;
        cg.lag_grid.push_back(tau);
        cg.values.push_back(eval_family(FitFamily::cross_async, {0.3, 1.5, 8.0}, tau, 0.5, 0.05).value);
        cg.stderr.push_back(1e-3);
    }
    for (auto _ : state) benchmark::DoNotOptimize(fit_cross_async(cg, 0.5, 0.05));
}
BENCHMARK(BM_FitCrossAsync)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
