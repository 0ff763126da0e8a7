#include <benchmark/benchmark.h>

#include "bench_helpers.hpp"
#include "volpath/models.hpp"
#include "volpath/synth.hpp"

using namespace volpath;

namespace {

DesignMatrix bench_design(long n, long p, double noise) {
  Philox rng(4, 0);
  DesignMatrix d;
  d.shift = 0;
  d.columns.resize(n, p);
  d.target.resize(n);
  for (long j = 0; j < p; ++j) {
    d.names.push_back("x" + std::to_string(j));
    for (long i = 0; i < n; ++i) d.columns(i, j) = rng.normal();
  }
  for (long i = 0; i < n; ++i) {
    d.target(i) = d.columns(i, 0) - 0.5 * d.columns(i, p - 1) + noise * rng.normal();
    d.index.push_back(static_cast<int>(i));
    d.dates.push_back(Date{std::chrono::year{2020}, std::chrono::month{1}, std::chrono::day{6}});
  }
  return d;
}

const PdvSim& shared_pdv() {
  static PdvSim sim = simulate_pdv_panel({5e-5, -0.002, 0.5, 1.5, 0.8}, 2e-6, 1500, 5);
  return sim;
}

}  // namespace

static void BM_OlsFit(benchmark::State& state) {
  DesignMatrix d = bench_design(state.range(0), state.range(1), 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(ols_fit(d));
}
BENCHMARK(BM_OlsFit)->Args({600, 3})->Args({4016, 9})->Args({4016, 12});

static void BM_LassoFit(benchmark::State& state) {
  DesignMatrix d = bench_design(state.range(0), 12, 0.5);
  std::vector<double> grid = lasso_grid(d, 3, 1e-2);
  for (auto _ : state) benchmark::DoNotOptimize(lasso_fit(d, grid[1]));
}
BENCHMARK(BM_LassoFit)->Arg(600)->Arg(4016);

static void BM_LassoCv(benchmark::State& state) {
  DesignMatrix d = bench_design(600, 12, 0.5);
  std::vector<double> grid = lasso_grid(d, static_cast<int>(state.range(0)), 1e-3);
  for (auto _ : state) benchmark::DoNotOptimize(lasso_cv(d, grid, 10));
}
BENCHMARK(BM_LassoCv)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_BuildDesignHarPdCj(benchmark::State& state) {
  SimConfig sim;
  sim.n_days = static_cast<int>(state.range(0));
  sim.n_intraday = 26;
  sim.jump_intensity = 0.5;
  sim.jump_size_std = 0.02;
  sim.seed = 6;
  auto [panel, truth] = simulate_jump_diffusion(sim, 4);
  DesignInputs inputs = design_inputs_from(panel, components_panel(panel, {}, 4));
  ModelSpec spec{ModelFamily::HarPdCj, {1.5, 0.8, 2.0}};
  for (auto _ : state) benchmark::DoNotOptimize(build_design(spec, inputs));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BuildDesignHarPdCj)->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);

static void BM_FitPdBase(benchmark::State& state) {
  const PdvSim& sim = shared_pdv();
  DesignInputs inputs = design_inputs_from_series(sim.dates, sim.closes, sim.rv);
  PdFitOptions options;
  options.multi_starts = static_cast<int>(state.range(0));
  options.max_evals_per_start = 120;
  options.threads = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(fit_pd(ModelSpec{ModelFamily::PdvBase, {}}, inputs, options));
}
BENCHMARK(BM_FitPdBase)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);
