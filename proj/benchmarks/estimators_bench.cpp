#include <benchmark/benchmark.h>

#include "bench_helpers.hpp"
#include "volpath/estimators.hpp"

using namespace volpath;

static void BM_RealizedVariance(benchmark::State& state) {
  TradingDay day = vb::bench_day(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(realized_variance(day));
}
BENCHMARK(BM_RealizedVariance)->Arg(78)->Arg(390)->Arg(1950);

static void BM_BipowerVariation(benchmark::State& state) {
  TradingDay day = vb::bench_day(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(bipower_variation(day));
}
BENCHMARK(BM_BipowerVariation)->Arg(78)->Arg(390)->Arg(1950);

static void BM_TripowerQuarticity(benchmark::State& state) {
  TradingDay day = vb::bench_day(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tripower_quarticity(day));
}
BENCHMARK(BM_TripowerQuarticity)->Arg(78)->Arg(390)->Arg(1950);

static void BM_ReqDecompose(benchmark::State& state) {
  TradingDay day = vb::bench_day(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(req_decompose(day, 0.05, 0.95));
}
BENCHMARK(BM_ReqDecompose)->Arg(78)->Arg(1950);

static void BM_ComputeComponents(benchmark::State& state) {
  TradingDay day = vb::bench_day(static_cast<int>(state.range(0)));
  ComponentsConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(compute_components(day, config));
}
BENCHMARK(BM_ComputeComponents)->Arg(78)->Arg(390);

static void BM_LjungBox(benchmark::State& state) {
  std::vector<double> series = vb::bench_series(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ljung_box(series, 10));
}
BENCHMARK(BM_LjungBox)->Arg(1000)->Arg(5000);
