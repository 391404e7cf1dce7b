#include <benchmark/benchmark.h>

#include "cascade/correlations.hpp"
#include "cascade/linearized.hpp"
#include "cascade/semiclassical.hpp"
#include "cascade/stochastic.hpp"

using namespace cascade;

namespace {

const DriftDiffusion& regime1() {
  static const auto dd = [] {
    const auto p = regime_params(1);
    return linearize(p, find_steady_state(p).state);
  }();
  return dd;
}

}  // namespace

static void BM_SteadyState(benchmark::State& state) {
  const auto p = regime_params(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(find_steady_state(p));
}
BENCHMARK(BM_SteadyState)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

static void BM_OutputSpectrum(benchmark::State& state) {
  const auto p = regime_params(1);
  const auto& dd = regime1();
  double w = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(output_quad_spectrum(p, dd.a_matrix, dd.d_matrix, w));
    w += 1e-3;
  }
}
BENCHMARK(BM_OutputSpectrum);

static void BM_SpectrumGrid(benchmark::State& state) {
  const auto p = regime_params(1);
  const auto omegas = frequency_grid(-20.0, 20.0, 801);
  const auto threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(spectrum_grid(p, regime1(), omegas, threads));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(omegas.size()));
}
BENCHMARK(BM_SpectrumGrid)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

static void BM_CorrelationReport(benchmark::State& state) {
  const auto p = regime_params(1);
  const auto s = output_quad_spectrum(p, regime1().a_matrix, regime1().d_matrix, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(correlation_report(s));
}
BENCHMARK(BM_CorrelationReport);

static void BM_LyapunovSolve(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(stationary_covariance(regime1().a_matrix, regime1().d_matrix));
}
BENCHMARK(BM_LyapunovSolve);

static void BM_StochasticStep(benchmark::State& state) {
  const auto p = regime_params(1);
  auto s = regime1().steady_state;
  auto rng = trajectory_stream(1, 0);
  for (auto _ : state) {
    s = step_trajectory(s, p, 1e-3, rng);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_StochasticStep);

static void BM_Ensemble(benchmark::State& state) {
  const auto p = regime_params(1);
  EnsembleSettings st;
  st.dt = 5e-3;
  st.t_end = 10.0;
  st.n_traj = 64;
  st.initial = regime1().steady_state;
  st.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_ensemble(p, st));
  state.SetItemsProcessed(state.iterations() * 64 * 2000);
}
BENCHMARK(BM_Ensemble)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
