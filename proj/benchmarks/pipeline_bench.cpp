#include <benchmark/benchmark.h>

#include "bench_helpers.hpp"
#include "volpath/estimators.hpp"
#include "volpath/evaluate.hpp"
#include "volpath/forecast.hpp"
#include "volpath/synth.hpp"

using namespace volpath;

static void BM_SimulateJumpDiffusion(benchmark::State& state) {
  SimConfig config;
  config.n_days = static_cast<int>(state.range(0));
  config.n_intraday = 78;
  config.jump_intensity = 1.0;
  config.jump_size_std = 0.02;
  config.seed = 7;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_jump_diffusion(config, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateJumpDiffusion)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_ComponentsPanel(benchmark::State& state) {
  SimConfig config;
  config.n_days = 1000;
  config.n_intraday = 78;
  config.seed = 8;
  auto [panel, truth] = simulate_jump_diffusion(config, 4);
  for (auto _ : state)
    benchmark::DoNotOptimize(components_panel(panel, {}, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_ComponentsPanel)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_RollingForecastHar(benchmark::State& state) {
  SimConfig sim;
  sim.n_days = 1000;
  sim.n_intraday = 20;
  sim.seed = 9;
  auto [panel, truth] = simulate_jump_diffusion(sim, 4);
  DesignInputs inputs = design_inputs_from(panel, components_panel(panel, {}, 4));
  ForecastConfig config;
  config.window = static_cast<int>(state.range(0));
  config.out_len = 100;
  config.horizon = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        rolling_forecast(ModelSpec{ModelFamily::HarRv, {}}, inputs, config, {}, 4));
}
BENCHMARK(BM_RollingForecastHar)->Arg(250)->Arg(500)->Unit(benchmark::kMillisecond);

static void BM_McsBootstrap(benchmark::State& state) {
  Philox rng(10, 0);
  const int T = 600;
  std::vector<std::pair<std::string, std::vector<ForecastRecord>>> by_model;
  std::vector<double> rv(T);
  for (auto& x : rv) x = 2e-4 * (1.0 + 0.3 * std::abs(rng.normal()));
  for (int m = 0; m < 6; ++m) {
    std::vector<ForecastRecord> recs;
    for (int t = 0; t < T; ++t) {
      double pred = rv[static_cast<std::size_t>(t)] * (1.0 + 0.05 * (m + 1) * rng.normal());
      recs.push_back({Date{std::chrono::year{2021}, std::chrono::month{1}, std::chrono::day{4}},
                      1, std::abs(pred) + 1e-8, rv[static_cast<std::size_t>(t)]});
      recs.back().target_date = date_from_index(18000 + t);
    }
    by_model.emplace_back("m" + std::to_string(m), recs);
  }
  LossMatrix matrix = build_loss_matrix(align_forecasts(by_model));
  McsOptions options;
  options.reps = static_cast<int>(state.range(0));
  options.threads = 4;
  for (auto _ : state) benchmark::DoNotOptimize(mcs(matrix, LossKind::Qlike, options));
}
BENCHMARK(BM_McsBootstrap)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);
