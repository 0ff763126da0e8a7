#pragma once

#include <istream>
#include <ostream>

#include "volpath/models.hpp"

namespace volpath {

struct ForecastConfig {
  int window = 4016;          // in-sample length H
  int horizon = 1;            // direct h-step horizon
  int out_len = 600;          // out-of-sample block M
  int refit_lambda_every = 20;  // kernel decays re-estimated at these origins
  double floor_epsilon = 1e-12;  // negative forecasts floored before QLIKE

  void validate() const;
};

struct ForecastRecord {
  Date target_date{};
  int horizon = 1;
  double predicted = 0.0;
  double realized = 0.0;
};

struct LambdaRefit {
  int origin_index = 0;
  Date origin_date{};
  std::vector<double> lambdas;
  double lasso_penalty = 0.0;  // 0 unless the model shrinks
};

struct ForecastRun {
  ModelSpec spec;
  ForecastConfig config;
  std::vector<ForecastRecord> records;
  std::vector<LambdaRefit> refits;
  long floor_count = 0;
};

/// Rolling fixed-window re-estimation with direct h-step forecasts: the
/// design's target is re-aligned to rv at origin + h with regressors at the
/// origin, and the model is refit on exactly H target rows per origin.
/// Kernel decays (and the lasso penalty, for shrunk models) are
/// re-estimated at origins anchored to absolute panel positions every
/// `refit_lambda_every` steps, so each record depends only on (panel,
/// config, origin) and origins can run on any number of threads.
ForecastRun rolling_forecast(const ModelSpec& spec, const DesignInputs& inputs,
                             const ForecastConfig& config, const FitOptions& options = {},
                             int threads = 1);

/// Joins externally produced forecasts (CSV `date,horizon,predicted`) with
/// realized rv by date. Unmatched dates are reported through `unmatched`;
/// an empty join throws DataError.
std::vector<ForecastRecord> import_external_forecasts(std::istream& in,
                                                      const ComponentsPanel& components,
                                                      std::vector<std::string>* unmatched = nullptr);

void write_forecast_csv(std::ostream& out, std::span<const ForecastRecord> records);
std::vector<ForecastRecord> read_forecast_csv(std::istream& in);

std::string forecast_meta_json(const ForecastRun& run);

}  // namespace volpath
