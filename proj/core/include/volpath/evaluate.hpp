#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "volpath/forecast.hpp"

namespace volpath {

enum class LossKind { Mse, Mae, Hmse, Hmae, Qlike };
inline constexpr int kLossKindCount = 5;

const char* loss_name(LossKind kind);
LossKind loss_from_name(const std::string& name);

/// Per-model loss summary: the five loss kinds as both means and per-date
/// series. Ratio and log kinds require realized > 0; offending dates are
/// listed in the error.
struct LossResult {
  std::array<double, kLossKindCount> mean{};
  std::array<std::vector<double>, kLossKindCount> series;
};

LossResult losses(std::span<const ForecastRecord> records);

/// Forecasts of several models aligned on their common date set.
struct ForecastSet {
  std::vector<std::string> models;
  std::vector<Date> dates;
  std::vector<std::vector<double>> predicted;  // [model][date]
  std::vector<double> realized;
};

ForecastSet align_forecasts(
    const std::vector<std::pair<std::string, std::vector<ForecastRecord>>>& by_model);

struct LossMatrix {
  std::vector<std::string> models;
  std::vector<Date> dates;
  std::vector<std::array<std::vector<double>, kLossKindCount>> series;  // [model][kind][date]
  std::vector<std::array<double, kLossKindCount>> means;
};

LossMatrix build_loss_matrix(const ForecastSet& set);

enum class McsStatistic {
  RangeTR,          // max |dbar| / sd over pairs
  MaxPairwise,       // max dbar^2 / var over pairs, the semiquadratic form
  MaxPerModel,      // conventional per-model t statistic variant
};

struct McsOptions {
  double level = 0.25;
  int reps = 5000;
  int block_len = 0;  // 0 selects ceil(M^(1/3))
  std::uint64_t seed = 1;
  McsStatistic statistic = McsStatistic::RangeTR;
  int threads = 1;
};

struct McsResult {
  McsStatistic statistic;
  std::vector<std::string> models;
  std::vector<double> p_values;        // monotonized MCS p-value per model
  std::vector<int> elimination_order;  // model indices, first eliminated first
  std::vector<std::string> survivors;  // at the requested level
  double level = 0.25;
  int reps = 0;
  int block_len = 0;
};

/// Hansen-style model confidence set with a moving-block bootstrap for the
/// differential variances and the recentered null distribution. Bootstrap
/// replications use one counter-based stream each, so the result is
/// bit-reproducible for a fixed seed at any thread count.
McsResult mcs(const LossMatrix& matrix, LossKind kind, const McsOptions& options);

struct OosR2Result {
  std::string benchmark;
  std::vector<std::string> models;     // benchmark included
  std::vector<double> r2_oos_pct;      // 100 * (1 - SSE_model / SSE_benchmark)
  std::vector<double> mspe_adj_stat;
  std::vector<double> p_one_sided;
};

/// Out-of-sample R^2 against a benchmark with the MSPE-adjusted comparison
/// test (per-date adjustment term (pred0 - predj)^2, one-sided normal p).
OosR2Result oos_r2(const ForecastSet& set, const std::string& benchmark);

}  // namespace volpath
