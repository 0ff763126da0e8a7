#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "volpath/toml.hpp"

namespace volpath {

/// Declarative run configuration: TOML file plus CLI flag overrides. Every
/// default mirrors the stated pipeline defaults (jump tail 0.05, quantile
/// pair 0.05/0.95, fit window 4016, out-of-sample 600, 10 CV folds, 5000
/// bootstrap replications, confidence levels 0.01/0.1/0.25).
struct RunConfig {
  std::uint64_t seed = 42;
  int threads = 0;  // 0 = hardware concurrency
  std::string output_dir = "out";

  // [input]
  std::string bars;
  std::string timestamp_column = "timestamp";
  std::string price_column = "price";
  int min_obs = 10;
  bool drop_report = true;

  // [estimators]
  double jump_alpha = 0.05;
  double rex_alpha = 0.05;
  double req_low = 0.05;
  double req_high = 0.95;

  // [features]
  std::string return_convention = "cumulative";  // or "one_day"
  bool normalize_weights = false;
  int max_cutoff = 1000;
  int warmup = 60;
  bool export_features = false;
  double feature_lambda_r1 = 1.0;
  double feature_lambda_r2 = 1.0;
  double feature_lambda_pd = 1.0;

  // [models]
  std::vector<std::string> models = {"HAR_RV", "HAR_CJ", "HAR_RS", "HAR_REX", "HAR_REQ",
                                     "HAR_PD_RV", "HAR_PD_CJ", "HAR_PD_RS", "HAR_PD_REX",
                                     "HAR_PD_REQ"};
  double lambda_lo = 0.01;
  double lambda_hi = 50.0;
  int multi_starts = 5;
  int max_evals = 200;
  bool robust_se = false;

  // [lasso]
  int cv_folds = 10;
  int grid_size = 100;
  double grid_min_ratio = 1e-4;

  // [forecast]
  int window = 4016;
  std::vector<int> horizons = {1, 5, 22};
  int out_len = 600;
  int refit_lambda_every = 20;
  double floor_epsilon = 1e-12;

  // [evaluate]
  std::string forecast_dir;  // defaults to <output_dir>/forecasts
  std::vector<std::string> mcs_losses = {"QLIKE", "MSE"};
  std::vector<double> mcs_levels = {0.01, 0.1, 0.25};
  int mcs_reps = 5000;
  int mcs_block = 0;
  bool mcs_tmax_per_model = false;
  std::string benchmark = "HAR_RV";
  std::vector<std::string> external_names;
  std::vector<std::string> external_files;

  // [simulate]
  int sim_days = 1000;
  int sim_intraday = 78;
  double sim_mu = 0.0;
  std::string sim_vol_kind = "constant";  // or "two_state"
  double sim_vol = 0.2;
  double sim_vol_high = 0.4;
  double sim_switch_prob = 0.05;
  double sim_jump_intensity = 0.0;
  double sim_jump_size_std = 0.0;

  void validate() const;
};

RunConfig config_from_toml(const TomlTable& table);
RunConfig load_run_config(const std::string& path);

/// Stable fingerprint of every knob in effect, recorded in run.json.
std::string config_knobs_json(const RunConfig& config);

int cmd_simulate(const RunConfig& config);
int cmd_estimate(const RunConfig& config);
int cmd_fit(const RunConfig& config);
int cmd_forecast(const RunConfig& config);
int cmd_evaluate(const RunConfig& config);
int cmd_report(const RunConfig& config);

}  // namespace volpath
