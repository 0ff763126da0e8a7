// volpath: realized-volatility forecasting pipeline.
//
// Subcommands: estimate, fit, forecast, evaluate, simulate, report.
// Configuration comes from a TOML file (--config) with flag overrides.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "volpath/common.hpp"
#include "volpath/run.hpp"

using volpath::RunConfig;

namespace {

struct Overrides {
  std::string config_path;
  // Flag storage; only values the user actually passed are applied.
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out, bars, benchmark, models, convention;
  double alpha = 0, rex_alpha = 0;
  std::vector<double> req_quantiles;
  int window = 0, out_len = 0, min_obs = 0, mcs_reps = 0;
  std::vector<int> horizons;
  int sim_days = 0, sim_intraday = 0;
  double sim_vol = 0, sim_jump_intensity = 0, sim_jump_size_std = 0, sim_mu = 0;
  std::string sim_vol_kind;
  double sim_vol_high = 0, sim_switch_prob = 0;
  bool export_features = false;
};

void add_common_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "TOML run configuration file");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--threads", o.threads, "worker threads (0 = hardware)")
      ->envname("VOLPATH_THREADS");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--bars", o.bars, "intraday bar CSV input");
  cmd->add_option("--models", o.models, "comma-separated model list");
}

RunConfig resolve(const CLI::App* cmd, const Overrides& o) {
  RunConfig c;
  if (!o.config_path.empty()) c = volpath::load_run_config(o.config_path);
  auto passed = [cmd](const std::string& flag) { return cmd->count(flag) > 0; };

  if (passed("--seed")) c.seed = o.seed;
  if (passed("--threads") || std::getenv("VOLPATH_THREADS")) c.threads = o.threads;
  if (passed("--out")) c.output_dir = o.out;
  if (passed("--bars")) c.bars = o.bars;
  if (passed("--models")) {
    c.models.clear();
    std::string item;
    for (char ch : o.models + ",") {
      if (ch == ',') {
        if (!item.empty()) c.models.push_back(item);
        item.clear();
      } else {
        item += ch;
      }
    }
  }
  if (cmd->get_option_no_throw("--alpha") && passed("--alpha")) c.jump_alpha = o.alpha;
  if (cmd->get_option_no_throw("--rex-alpha") && passed("--rex-alpha")) c.rex_alpha = o.rex_alpha;
  if (cmd->get_option_no_throw("--req-quantiles") && passed("--req-quantiles")) {
    c.req_low = o.req_quantiles.at(0);
    c.req_high = o.req_quantiles.at(1);
  }
  if (cmd->get_option_no_throw("--min-obs") && passed("--min-obs")) c.min_obs = o.min_obs;
  if (cmd->get_option_no_throw("--features") && passed("--features")) c.export_features = true;
  if (cmd->get_option_no_throw("--window") && passed("--window")) c.window = o.window;
  if (cmd->get_option_no_throw("--out-len") && passed("--out-len")) c.out_len = o.out_len;
  if (cmd->get_option_no_throw("--horizons") && passed("--horizons")) c.horizons = o.horizons;
  if (cmd->get_option_no_throw("--benchmark") && passed("--benchmark"))
    c.benchmark = o.benchmark;
  if (cmd->get_option_no_throw("--mcs-reps") && passed("--mcs-reps")) c.mcs_reps = o.mcs_reps;
  if (cmd->get_option_no_throw("--days") && passed("--days")) c.sim_days = o.sim_days;
  if (cmd->get_option_no_throw("--intraday") && passed("--intraday"))
    c.sim_intraday = o.sim_intraday;
  if (cmd->get_option_no_throw("--vol") && passed("--vol")) c.sim_vol = o.sim_vol;
  if (cmd->get_option_no_throw("--vol-kind") && passed("--vol-kind"))
    c.sim_vol_kind = o.sim_vol_kind;
  if (cmd->get_option_no_throw("--vol-high") && passed("--vol-high"))
    c.sim_vol_high = o.sim_vol_high;
  if (cmd->get_option_no_throw("--switch-prob") && passed("--switch-prob"))
    c.sim_switch_prob = o.sim_switch_prob;
  if (cmd->get_option_no_throw("--mu") && passed("--mu")) c.sim_mu = o.sim_mu;
  if (cmd->get_option_no_throw("--jump-intensity") && passed("--jump-intensity"))
    c.sim_jump_intensity = o.sim_jump_intensity;
  if (cmd->get_option_no_throw("--jump-size-std") && passed("--jump-size-std"))
    c.sim_jump_size_std = o.sim_jump_size_std;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"volpath - path-dependent realized volatility forecasting"};
  app.set_version_flag("--version", VOLPATH_VERSION);
  app.require_subcommand(1);

  Overrides o;

  CLI::App* estimate = app.add_subcommand("estimate", "compute per-day estimator panel");
  add_common_flags(estimate, o);
  estimate->add_option("--alpha", o.alpha, "jump-test tail probability");
  estimate->add_option("--rex-alpha", o.rex_alpha, "extreme-volatility tail probability");
  estimate->add_option("--req-quantiles", o.req_quantiles, "empirical quantile pair")
      ->expected(2);
  estimate->add_option("--min-obs", o.min_obs, "minimum intraday returns per day");
  estimate->add_flag("--features", o.export_features, "export feature panel CSV");

  CLI::App* fit = app.add_subcommand("fit", "fit the configured model catalog");
  add_common_flags(fit, o);
  fit->add_option("--alpha", o.alpha, "jump-test tail probability");

  CLI::App* forecast = app.add_subcommand("forecast", "rolling out-of-sample forecasts");
  add_common_flags(forecast, o);
  forecast->add_option("--window", o.window, "fixed in-sample window H");
  forecast->add_option("--out-len", o.out_len, "out-of-sample length M");
  forecast->add_option("--horizons", o.horizons, "forecast horizons");

  CLI::App* evaluate = app.add_subcommand("evaluate", "loss, MCS and out-of-sample R2 tables");
  add_common_flags(evaluate, o);
  evaluate->add_option("--horizons", o.horizons, "horizons to evaluate");
  evaluate->add_option("--benchmark", o.benchmark, "benchmark model for oos R2");
  evaluate->add_option("--mcs-reps", o.mcs_reps, "bootstrap replications");

  CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic panel with truth");
  add_common_flags(simulate, o);
  simulate->add_option("--days", o.sim_days, "trading days");
  simulate->add_option("--intraday", o.sim_intraday, "intraday returns per day");
  simulate->add_option("--vol", o.sim_vol, "annualized volatility");
  simulate->add_option("--vol-kind", o.sim_vol_kind, "constant or two_state");
  simulate->add_option("--vol-high", o.sim_vol_high, "second regime volatility");
  simulate->add_option("--switch-prob", o.sim_switch_prob, "per-day regime switch probability");
  simulate->add_option("--mu", o.sim_mu, "annualized drift");
  simulate->add_option("--jump-intensity", o.sim_jump_intensity, "expected jumps per day");
  simulate->add_option("--jump-size-std", o.sim_jump_size_std, "per-jump return std");

  CLI::App* report = app.add_subcommand("report", "print run tables from an output directory");
  add_common_flags(report, o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (estimate->parsed()) return volpath::cmd_estimate(resolve(estimate, o));
    if (fit->parsed()) return volpath::cmd_fit(resolve(fit, o));
    if (forecast->parsed()) return volpath::cmd_forecast(resolve(forecast, o));
    if (evaluate->parsed()) return volpath::cmd_evaluate(resolve(evaluate, o));
    if (simulate->parsed()) return volpath::cmd_simulate(resolve(simulate, o));
    if (report->parsed()) return volpath::cmd_report(resolve(report, o));
  } catch (const volpath::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
