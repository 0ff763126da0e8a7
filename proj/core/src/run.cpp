#include "volpath/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "volpath/estimators.hpp"
#include "volpath/evaluate.hpp"
#include "volpath/forecast.hpp"
#include "volpath/models.hpp"
#include "volpath/synth.hpp"

namespace volpath {

namespace fs = std::filesystem;

void RunConfig::validate() const {
  if (!(jump_alpha > 0.0 && jump_alpha < 1.0))
    throw ConfigError("jump alpha must lie in (0, 1)");
  ThresholdPolicy{ThresholdPolicy::Kind::NormalCdf, rex_alpha}.validate();
  if (!(req_low > 0.0 && req_low < req_high && req_high < 1.0))
    throw ConfigError("req quantiles need 0 < low < high < 1");
  if (return_convention != "cumulative" && return_convention != "one_day")
    throw ConfigError("return_convention must be 'cumulative' or 'one_day'");
  if (sim_vol_kind != "constant" && sim_vol_kind != "two_state")
    throw ConfigError("sim vol kind must be 'constant' or 'two_state'");
  if (min_obs < 2) throw ConfigError("min_obs must be >= 2");
  if (external_names.size() != external_files.size())
    throw ConfigError("external_names and external_files must have equal length");
  for (const auto& name : models) {
    std::string bare = name.rfind("LASSO_", 0) == 0 ? name.substr(6) : name;
    family_from_name(bare);  // throws on unknown names
  }
  for (const auto& kind : mcs_losses) loss_from_name(kind);
  for (int h : horizons)
    if (h < 1) throw ConfigError("forecast horizons must be >= 1");
}

RunConfig config_from_toml(const TomlTable& t) {
  RunConfig c;
  c.seed = static_cast<std::uint64_t>(t.get_int("seed", static_cast<long long>(c.seed)));
  c.threads = static_cast<int>(t.get_int("threads", c.threads));
  c.output_dir = t.get_string("output_dir", c.output_dir);

  c.bars = t.get_string("input.bars", c.bars);
  c.timestamp_column = t.get_string("input.timestamp_column", c.timestamp_column);
  c.price_column = t.get_string("input.price_column", c.price_column);
  c.min_obs = static_cast<int>(t.get_int("input.min_obs", c.min_obs));
  c.drop_report = t.get_bool("input.drop_report", c.drop_report);

  c.jump_alpha = t.get_double("estimators.alpha", c.jump_alpha);
  c.rex_alpha = t.get_double("estimators.rex_alpha", c.rex_alpha);
  auto req = t.get_double_array("estimators.req_quantiles", {c.req_low, c.req_high});
  if (req.size() != 2) throw ConfigError("estimators.req_quantiles needs two entries");
  c.req_low = req[0];
  c.req_high = req[1];

  c.return_convention = t.get_string("features.return_convention", c.return_convention);
  c.normalize_weights = t.get_bool("features.normalize_weights", c.normalize_weights);
  c.max_cutoff = static_cast<int>(t.get_int("features.max_cutoff", c.max_cutoff));
  c.warmup = static_cast<int>(t.get_int("features.warmup", c.warmup));
  c.export_features = t.get_bool("features.export", c.export_features);
  c.feature_lambda_r1 = t.get_double("features.lambda_r1", c.feature_lambda_r1);
  c.feature_lambda_r2 = t.get_double("features.lambda_r2", c.feature_lambda_r2);
  c.feature_lambda_pd = t.get_double("features.lambda_pd", c.feature_lambda_pd);

  c.models = t.get_string_array("models.list", c.models);
  auto box = t.get_double_array("models.lambda_box", {c.lambda_lo, c.lambda_hi});
  if (box.size() != 2) throw ConfigError("models.lambda_box needs two entries");
  c.lambda_lo = box[0];
  c.lambda_hi = box[1];
  c.multi_starts = static_cast<int>(t.get_int("models.multi_starts", c.multi_starts));
  c.max_evals = static_cast<int>(t.get_int("models.max_evals", c.max_evals));
  c.robust_se = t.get_bool("models.robust_se", c.robust_se);

  c.cv_folds = static_cast<int>(t.get_int("lasso.folds", c.cv_folds));
  c.grid_size = static_cast<int>(t.get_int("lasso.grid_size", c.grid_size));
  c.grid_min_ratio = t.get_double("lasso.grid_min_ratio", c.grid_min_ratio);

  c.window = static_cast<int>(t.get_int("forecast.window", c.window));
  c.horizons = t.get_int_array("forecast.horizons", c.horizons);
  c.out_len = static_cast<int>(t.get_int("forecast.out_len", c.out_len));
  c.refit_lambda_every =
      static_cast<int>(t.get_int("forecast.refit_lambda_every", c.refit_lambda_every));
  c.floor_epsilon = t.get_double("forecast.floor", c.floor_epsilon);

  c.forecast_dir = t.get_string("evaluate.forecast_dir", c.forecast_dir);
  c.mcs_losses = t.get_string_array("evaluate.mcs_losses", c.mcs_losses);
  c.mcs_levels = t.get_double_array("evaluate.mcs_levels", c.mcs_levels);
  c.mcs_reps = static_cast<int>(t.get_int("evaluate.mcs_reps", c.mcs_reps));
  c.mcs_block = static_cast<int>(t.get_int("evaluate.mcs_block", c.mcs_block));
  c.mcs_tmax_per_model = t.get_bool("evaluate.mcs_tmax_per_model", c.mcs_tmax_per_model);
  c.benchmark = t.get_string("evaluate.benchmark", c.benchmark);
  c.external_names = t.get_string_array("evaluate.external_names", c.external_names);
  c.external_files = t.get_string_array("evaluate.external_files", c.external_files);

  c.sim_days = static_cast<int>(t.get_int("simulate.days", c.sim_days));
  c.sim_intraday = static_cast<int>(t.get_int("simulate.intraday", c.sim_intraday));
  c.sim_mu = t.get_double("simulate.mu", c.sim_mu);
  c.sim_vol_kind = t.get_string("simulate.vol_kind", c.sim_vol_kind);
  c.sim_vol = t.get_double("simulate.vol", c.sim_vol);
  c.sim_vol_high = t.get_double("simulate.vol_high", c.sim_vol_high);
  c.sim_switch_prob = t.get_double("simulate.switch_prob", c.sim_switch_prob);
  c.sim_jump_intensity = t.get_double("simulate.jump_intensity", c.sim_jump_intensity);
  c.sim_jump_size_std = t.get_double("simulate.jump_size_std", c.sim_jump_size_std);
  return c;
}

RunConfig load_run_config(const std::string& path) {
  RunConfig c = config_from_toml(parse_toml_file(path));
  return c;
}

namespace {

nlohmann::json knobs(const RunConfig& c) {
  // Semantic knobs only: file locations stay out so reruns into different
  // directories produce identical manifests.
  nlohmann::json j;
  j["seed"] = c.seed;
  j["input"] = {{"timestamp_column", c.timestamp_column},
                {"price_column", c.price_column},
                {"min_obs", c.min_obs}};
  j["estimators"] = {{"alpha", c.jump_alpha},
                     {"rex_alpha", c.rex_alpha},
                     {"req_quantiles", {c.req_low, c.req_high}},
                     {"quantile_rule", "type7_linear_interpolation"},
                     {"cj_truncated_at_zero", true}};
  j["features"] = {{"return_convention", c.return_convention},
                   {"normalize_weights", c.normalize_weights},
                   {"max_cutoff", c.max_cutoff},
                   {"warmup", c.warmup}};
  j["models"] = {{"list", c.models},
                 {"lambda_box", {c.lambda_lo, c.lambda_hi}},
                 {"multi_starts", c.multi_starts},
                 {"max_evals", c.max_evals},
                 {"robust_se", c.robust_se}};
  j["lasso"] = {{"folds", c.cv_folds},
                {"grid_size", c.grid_size},
                {"grid_min_ratio", c.grid_min_ratio}};
  j["forecast"] = {{"window", c.window},
                   {"horizons", c.horizons},
                   {"out_len", c.out_len},
                   {"refit_lambda_every", c.refit_lambda_every},
                   {"floor", c.floor_epsilon}};
  j["evaluate"] = {{"mcs_losses", c.mcs_losses},
                   {"mcs_levels", c.mcs_levels},
                   {"mcs_reps", c.mcs_reps},
                   {"mcs_block", c.mcs_block},
                   {"mcs_tmax_per_model", c.mcs_tmax_per_model},
                   {"benchmark", c.benchmark}};
  j["simulate"] = {{"days", c.sim_days},
                   {"intraday", c.sim_intraday},
                   {"mu", c.sim_mu},
                   {"vol_kind", c.sim_vol_kind},
                   {"vol", c.sim_vol},
                   {"vol_high", c.sim_vol_high},
                   {"switch_prob", c.sim_switch_prob},
                   {"jump_intensity", c.sim_jump_intensity},
                   {"jump_size_std", c.sim_jump_size_std}};
  return j;
}

void write_run_manifest(const RunConfig& c, const std::string& command) {
  nlohmann::json j;
  j["tool"] = "volpath";
  j["version"] = VOLPATH_VERSION;
  j["command"] = command;
  j["knobs"] = knobs(c);
  char hash[20];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a64(j["knobs"].dump())));
  j["config_hash"] = hash;
  std::ofstream out(fs::path(c.output_dir) / "run.json");
  out << j.dump(2) << '\n';
}

std::ofstream open_output(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

Panel load_panel(const RunConfig& c, std::vector<DropRecord>* drops) {
  if (c.bars.empty()) throw ConfigError("no input: set input.bars or --bars");
  std::ifstream in(c.bars);
  if (!in) throw ConfigError("cannot open bar file '" + c.bars + "'");
  BarColumns columns{c.timestamp_column, c.price_column};
  std::vector<BarRecord> bars = parse_bars(in, columns, drops);
  return build_panel(bars, c.min_obs, drops);
}

ComponentsConfig components_config(const RunConfig& c) {
  return {c.jump_alpha, c.rex_alpha, c.req_low, c.req_high};
}

FeatureConfig feature_config(const RunConfig& c) {
  FeatureConfig f;
  f.convention = c.return_convention == "one_day" ? ReturnConvention::OneDay
                                                  : ReturnConvention::Cumulative;
  f.normalize_weights = c.normalize_weights;
  f.max_cutoff = c.max_cutoff;
  f.warmup = c.warmup;
  return f;
}

FitOptions fit_options(const RunConfig& c) {
  FitOptions o;
  o.pd.lambda_lo = c.lambda_lo;
  o.pd.lambda_hi = c.lambda_hi;
  o.pd.multi_starts = c.multi_starts;
  o.pd.max_evals_per_start = c.max_evals;
  o.pd.threads = c.threads;
  o.pd.ols.robust_se = c.robust_se;
  o.ols.robust_se = c.robust_se;
  o.cv_folds = c.cv_folds;
  o.grid_size = c.grid_size;
  o.grid_min_ratio = c.grid_min_ratio;
  return o;
}

ModelSpec spec_from_name(const std::string& name) {
  ModelSpec spec;
  std::string bare = name;
  if (bare.rfind("LASSO_", 0) == 0) {
    spec.shrinkage = Shrinkage::Lasso;
    bare = bare.substr(6);
  }
  spec.family = family_from_name(bare);
  return spec;
}

void write_drop_report(const RunConfig& c, const std::vector<DropRecord>& drops) {
  if (!c.drop_report) return;
  auto out = open_output(fs::path(c.output_dir) / "drop_report.jsonl");
  for (const auto& d : drops) out << drop_report_json(d) << '\n';
}

std::string cell(double x) {
  if (std::isnan(x)) return "nan";
  return format_double(x);
}

}  // namespace

std::string config_knobs_json(const RunConfig& config) { return knobs(config).dump(2); }

int cmd_simulate(const RunConfig& c) {
  c.validate();
  SimConfig sim;
  sim.n_days = c.sim_days;
  sim.n_intraday = c.sim_intraday;
  sim.mu = c.sim_mu;
  sim.vol.kind = c.sim_vol_kind == "two_state" ? VolProcess::Kind::TwoState
                                               : VolProcess::Kind::Constant;
  sim.vol.level = c.sim_vol;
  sim.vol.level_high = c.sim_vol_high;
  sim.vol.switch_prob = c.sim_switch_prob;
  sim.jump_intensity = c.sim_jump_intensity;
  sim.jump_size_std = c.sim_jump_size_std;
  sim.seed = c.seed;

  auto [panel, truth] = simulate_jump_diffusion(sim, c.threads);

  auto bars_out = open_output(fs::path(c.output_dir) / "bars.csv");
  bars_out << "timestamp,price\n";
  for (const auto& day : panel.days) {
    int second = 9 * 3600 + 30 * 60;
    int spacing = bar_spacing_seconds(static_cast<int>(day.prices.size()));
    for (double price : day.prices) {
      char ts[32];
      std::snprintf(ts, sizeof(ts), "%s %02d:%02d:%02d", to_string(day.date).c_str(),
                    second / 3600, second / 60 % 60, second % 60);
      bars_out << ts << ',' << format_double(price) << '\n';
      second += spacing;
    }
  }
  auto truth_out = open_output(fs::path(c.output_dir) / "truth.csv");
  write_truth_csv(truth_out, panel.calendar, truth);
  write_run_manifest(c, "simulate");
  std::cout << "simulate: wrote " << panel.size() << " days to " << c.output_dir << "\n";
  return 0;
}

int cmd_estimate(const RunConfig& c) {
  c.validate();
  std::vector<DropRecord> drops;
  Panel panel = load_panel(c, &drops);
  ComponentsPanel components = components_panel(panel, components_config(c), c.threads);

  auto csv = open_output(fs::path(c.output_dir) / "components.csv");
  write_components_csv(csv, components);
  write_drop_report(c, drops);

  // Descriptive statistics table, one row per component plus a
  // Ljung-Box(10) column pair.
  {
    auto stats_csv = open_output(fs::path(c.output_dir) / "descriptive_stats.csv");
    auto stats_txt = open_output(fs::path(c.output_dir) / "descriptive_stats.txt");
    stats_csv << "variable,mean,std,skewness,kurtosis,max,min,ljung_box10,ljung_box10_p\n";
    char line[256];
    std::snprintf(line, sizeof(line), "%-8s %12s %12s %10s %10s %12s %12s %12s %10s\n",
                  "variable", "mean", "std", "skew", "kurt", "max", "min", "LB(10)", "p");
    stats_txt << line;
    for (int ci = 0; ci < kComponentCount; ++ci) {
      auto component = static_cast<Component>(ci);
      if (component == Component::Z) continue;  // test statistic, not a variance share
      std::vector<double> col = components.column(component);
      if (col.size() < 2) continue;  // a one-day panel has no moments to report
      Describe d = describe(col);
      double lb = std::nan(""), lb_p = std::nan("");
      if (col.size() > 10) {
        try {
          LjungBoxResult r = ljung_box(col, 10);
          lb = r.statistic;
          lb_p = r.p_value;
        } catch (const DataError&) {
          // constant column (e.g. no jump days): autocorrelation undefined
        }
      }
      const char* name = kComponentNames[static_cast<std::size_t>(ci)];
      stats_csv << name << ',' << cell(d.mean) << ',' << cell(d.std_dev) << ','
                << cell(d.skewness) << ',' << cell(d.kurtosis) << ',' << cell(d.max) << ','
                << cell(d.min) << ',' << cell(lb) << ',' << cell(lb_p) << '\n';
      std::snprintf(line, sizeof(line),
                    "%-8s %12.4g %12.4g %10.3f %10.3f %12.4g %12.4g %12.4g %10.4f\n", name,
                    d.mean, d.std_dev, d.skewness, d.kurtosis, d.max, d.min, lb, lb_p);
      stats_txt << line;
    }
  }

  if (c.export_features) {
    FeatureConfig fc = feature_config(c);
    std::vector<double> closes = panel.closes();
    KernelParam k1 = KernelParam::from_lambda(c.feature_lambda_r1, 1e-10, fc.max_cutoff);
    KernelParam k2 = KernelParam::from_lambda(c.feature_lambda_r2, 1e-10, fc.max_cutoff);
    KernelParam kp = KernelParam::from_lambda(c.feature_lambda_pd, 1e-10, fc.max_cutoff);
    FeatureSeries r1 = trend_feature(closes, k1, fc);
    FeatureSeries r2 = vol_feature(closes, k2, fc);
    std::vector<FeatureSeries> pds;
    for (int ci = 0; ci < kComponentCount; ++ci)
      pds.push_back(pd_transform(components.column(static_cast<Component>(ci)), kp, fc));
    auto feat = open_output(fs::path(c.output_dir) / "features.csv");
    feat << "date,r1,r2";
    for (const char* name : kComponentNames) feat << ",pd_" << name;
    feat << '\n';
    for (std::size_t i = 0; i < panel.calendar.size(); ++i) {
      feat << to_string(panel.calendar[i]) << ',' << cell(r1.values[i]) << ','
           << cell(r2.values[i]);
      for (const auto& pd : pds) feat << ',' << cell(pd.values[i]);
      feat << '\n';
    }
    nlohmann::json meta;
    meta["lambda_r1"] = c.feature_lambda_r1;
    meta["lambda_r2"] = c.feature_lambda_r2;
    meta["lambda_pd"] = c.feature_lambda_pd;
    meta["cutoff_r1"] = k1.cutoff;
    meta["cutoff_r2"] = k2.cutoff;
    meta["cutoff_pd"] = kp.cutoff;
    meta["return_convention"] = c.return_convention;
    meta["normalize_weights"] = c.normalize_weights;
    meta["warmup"] = c.warmup;
    meta["quantile_rule"] = "type7_linear_interpolation";
    auto meta_out = open_output(fs::path(c.output_dir) / "features_meta.json");
    meta_out << meta.dump(2) << '\n';
  }

  write_run_manifest(c, "estimate");
  std::cout << "estimate: " << components.size() << " days -> " << c.output_dir << "\n";
  return 0;
}

int cmd_fit(const RunConfig& c) {
  c.validate();
  Panel panel = load_panel(c, nullptr);
  ComponentsPanel components = components_panel(panel, components_config(c), c.threads);
  DesignInputs inputs = design_inputs_from(panel, std::move(components), feature_config(c));
  FitOptions options = fit_options(c);

  auto summary_csv = open_output(fs::path(c.output_dir) / "fit_summary.csv");
  auto summary_txt = open_output(fs::path(c.output_dir) / "fit_summary.txt");
  summary_csv << "model,n_rows,adj_r2,aic,bic,lambdas\n";
  char line[256];
  std::snprintf(line, sizeof(line), "%-22s %8s %10s %14s %14s\n", "model", "n", "adj_r2", "AIC",
                "BIC");
  summary_txt << line;

  for (const auto& name : c.models) {
    ModelSpec spec = spec_from_name(name);
    FitResult fit = fit_model(spec, inputs, options);
    auto json_out = open_output(fs::path(c.output_dir) / "fits" / (name + ".json"));
    json_out << fit_result_json(fit) << '\n';
    auto txt_out = open_output(fs::path(c.output_dir) / "fits" / (name + ".txt"));
    txt_out << fit_result_text(fit);

    std::string lambda_list;
    for (std::size_t i = 0; i < fit.lambdas_hat.size(); ++i) {
      if (i) lambda_list += ';';
      lambda_list += format_double(fit.lambdas_hat[i]);
    }
    summary_csv << name << ',' << fit.n_rows << ',' << format_double(fit.adj_r2) << ','
                << format_double(fit.aic) << ',' << format_double(fit.bic) << ',' << lambda_list
                << '\n';
    std::snprintf(line, sizeof(line), "%-22s %8ld %10.4f %14.2f %14.2f\n", name.c_str(),
                  fit.n_rows, fit.adj_r2, fit.aic, fit.bic);
    summary_txt << line;
    std::cout << "fit: " << name << " adj_r2 " << fit.adj_r2 << "\n";
  }
  write_run_manifest(c, "fit");
  return 0;
}

int cmd_forecast(const RunConfig& c) {
  c.validate();
  Panel panel = load_panel(c, nullptr);
  ComponentsPanel components = components_panel(panel, components_config(c), c.threads);
  DesignInputs inputs = design_inputs_from(panel, std::move(components), feature_config(c));
  FitOptions options = fit_options(c);

  for (const auto& name : c.models) {
    ModelSpec spec = spec_from_name(name);
    for (int h : c.horizons) {
      ForecastConfig fc;
      fc.window = c.window;
      fc.horizon = h;
      fc.out_len = c.out_len;
      fc.refit_lambda_every = c.refit_lambda_every;
      fc.floor_epsilon = c.floor_epsilon;
      ForecastRun run = rolling_forecast(spec, inputs, fc, options, c.threads);
      std::string stem = name + "_h" + std::to_string(h);
      auto csv = open_output(fs::path(c.output_dir) / "forecasts" / (stem + ".csv"));
      write_forecast_csv(csv, run.records);
      auto meta = open_output(fs::path(c.output_dir) / "forecast_meta" / (stem + ".json"));
      meta << forecast_meta_json(run) << '\n';
      std::cout << "forecast: " << stem << " -> " << run.records.size() << " records\n";
    }
  }
  write_run_manifest(c, "forecast");
  return 0;
}

int cmd_evaluate(const RunConfig& c) {
  c.validate();
  Panel panel = load_panel(c, nullptr);
  ComponentsPanel components = components_panel(panel, components_config(c), c.threads);
  fs::path forecast_dir =
      c.forecast_dir.empty() ? fs::path(c.output_dir) / "forecasts" : fs::path(c.forecast_dir);

  for (int h : c.horizons) {
    std::vector<std::pair<std::string, std::vector<ForecastRecord>>> by_model;
    for (const auto& name : c.models) {
      fs::path file = forecast_dir / (name + "_h" + std::to_string(h) + ".csv");
      std::ifstream in(file);
      if (!in) throw ConfigError("missing forecast file '" + file.string() + "'");
      by_model.emplace_back(name, read_forecast_csv(in));
    }
    for (std::size_t e = 0; e < c.external_files.size(); ++e) {
      std::ifstream in(c.external_files[e]);
      if (!in) throw ConfigError("missing external forecast file '" + c.external_files[e] + "'");
      std::vector<ForecastRecord> all = import_external_forecasts(in, components);
      std::vector<ForecastRecord> at_h;
      for (const auto& r : all)
        if (r.horizon == h) at_h.push_back(r);
      if (!at_h.empty()) by_model.emplace_back(c.external_names[e], at_h);
    }

    ForecastSet set = align_forecasts(by_model);
    LossMatrix matrix = build_loss_matrix(set);

    {
      auto csv = open_output(fs::path(c.output_dir) / ("losses_h" + std::to_string(h) + ".csv"));
      auto txt = open_output(fs::path(c.output_dir) / ("losses_h" + std::to_string(h) + ".txt"));
      csv << "model";
      for (int k = 0; k < kLossKindCount; ++k) csv << ',' << loss_name(static_cast<LossKind>(k));
      csv << '\n';
      char line[256];
      std::snprintf(line, sizeof(line), "%-22s %12s %12s %10s %10s %10s\n", "model", "MSE", "MAE",
                    "HMSE", "HMAE", "QLIKE");
      txt << line;
      for (std::size_t m = 0; m < matrix.models.size(); ++m) {
        csv << matrix.models[m];
        for (int k = 0; k < kLossKindCount; ++k)
          csv << ',' << format_double(matrix.means[m][static_cast<std::size_t>(k)]);
        csv << '\n';
        std::snprintf(line, sizeof(line), "%-22s %12.4g %12.4g %10.4f %10.4f %10.4f\n",
                      matrix.models[m].c_str(), matrix.means[m][0], matrix.means[m][1],
                      matrix.means[m][2], matrix.means[m][3], matrix.means[m][4]);
        txt << line;
      }
    }

    std::map<std::string, std::pair<McsResult, McsResult>> mcs_results;  // kind -> (tmax, tr)
    for (const auto& kind_name : c.mcs_losses) {
      LossKind kind = loss_from_name(kind_name);
      McsOptions base;
      base.reps = c.mcs_reps;
      base.block_len = c.mcs_block;
      base.seed = c.seed;
      base.threads = c.threads;
      base.level = c.mcs_levels.empty() ? 0.25 : c.mcs_levels.front();

      McsOptions tr = base;
      tr.statistic = McsStatistic::RangeTR;
      McsOptions tmax = base;
      tmax.statistic = c.mcs_tmax_per_model ? McsStatistic::MaxPerModel
                                            : McsStatistic::MaxPairwise;
      McsResult res_tmax = mcs(matrix, kind, tmax);
      McsResult res_tr = mcs(matrix, kind, tr);

      auto csv = open_output(fs::path(c.output_dir) /
                             ("mcs_h" + std::to_string(h) + "_" + kind_name + ".csv"));
      csv << "model,p_tmax,p_tr";
      for (double level : c.mcs_levels) {
        csv << ",survive_tmax_" << format_double(level) << ",survive_tr_" << format_double(level);
      }
      csv << '\n';
      for (std::size_t m = 0; m < matrix.models.size(); ++m) {
        csv << matrix.models[m] << ',' << format_double(res_tmax.p_values[m]) << ','
            << format_double(res_tr.p_values[m]);
        for (double level : c.mcs_levels) {
          csv << ',' << (res_tmax.p_values[m] >= level ? 1 : 0) << ','
              << (res_tr.p_values[m] >= level ? 1 : 0);
        }
        csv << '\n';
      }
      auto txt = open_output(fs::path(c.output_dir) /
                             ("mcs_h" + std::to_string(h) + "_" + kind_name + ".txt"));
      char line[200];
      std::snprintf(line, sizeof(line), "%-22s %8s %8s  survivors at", "model", "p_tmax", "p_tr");
      txt << line;
      for (double level : c.mcs_levels) {
        std::snprintf(line, sizeof(line), " %5.2f", level);
        txt << line;
      }
      txt << '\n';
      for (std::size_t m = 0; m < matrix.models.size(); ++m) {
        std::snprintf(line, sizeof(line), "%-22s %8.3f %8.3f              ",
                      matrix.models[m].c_str(), res_tmax.p_values[m], res_tr.p_values[m]);
        txt << line;
        for (double level : c.mcs_levels)
          txt << (res_tr.p_values[m] >= level ? "  yes " : "   -  ");
        txt << '\n';
      }
      mcs_results.emplace(kind_name, std::make_pair(std::move(res_tmax), std::move(res_tr)));
    }

    const bool have_benchmark =
        std::find(set.models.begin(), set.models.end(), c.benchmark) != set.models.end();
    OosR2Result oos;
    if (have_benchmark) {
      oos = oos_r2(set, c.benchmark);
      auto csv =
          open_output(fs::path(c.output_dir) / ("oos_r2_h" + std::to_string(h) + ".csv"));
      auto txt =
          open_output(fs::path(c.output_dir) / ("oos_r2_h" + std::to_string(h) + ".txt"));
      csv << "model,r2_oos_pct,mspe_adj,p_value\n";
      char line[160];
      std::snprintf(line, sizeof(line), "%-22s %12s %12s %10s\n", "model", "R2_oos(%)",
                    "MSPE-adj", "p");
      txt << line;
      for (std::size_t m = 0; m < oos.models.size(); ++m) {
        csv << oos.models[m] << ',' << format_double(oos.r2_oos_pct[m]) << ','
            << format_double(oos.mspe_adj_stat[m]) << ',' << format_double(oos.p_one_sided[m])
            << '\n';
        std::snprintf(line, sizeof(line), "%-22s %12.3f %12.4g %10.3f\n", oos.models[m].c_str(),
                      oos.r2_oos_pct[m], oos.mspe_adj_stat[m], oos.p_one_sided[m]);
        txt << line;
      }
    }

    // Machine-readable report bundling the loss matrix, MCS outcome and the
    // benchmark comparison for this horizon.
    {
      nlohmann::json report;
      report["horizon"] = h;
      report["dates"] = set.dates.size();
      report["models"] = set.models;
      for (std::size_t m = 0; m < matrix.models.size(); ++m) {
        nlohmann::json row;
        for (int k = 0; k < kLossKindCount; ++k)
          row[loss_name(static_cast<LossKind>(k))] = matrix.means[m][static_cast<std::size_t>(k)];
        report["losses"][matrix.models[m]] = row;
      }
      report["mcs"]["reps"] = c.mcs_reps;
      report["mcs"]["block_len"] = c.mcs_block;
      report["mcs"]["p_value_convention"] = "monotonized along the elimination order";
      for (const auto& [kind_name, results] : mcs_results) {
        for (auto [label, res] : {std::pair<const char*, const McsResult*>{"t_max", &results.first},
                                  std::pair<const char*, const McsResult*>{"t_r", &results.second}}) {
          nlohmann::json entry;
          for (std::size_t m = 0; m < res->models.size(); ++m)
            entry["p_values"][res->models[m]] = res->p_values[m];
          for (double level : c.mcs_levels) {
            std::vector<std::string> survivors;
            for (std::size_t m = 0; m < res->models.size(); ++m)
              if (res->p_values[m] >= level) survivors.push_back(res->models[m]);
            entry["survivors"][format_double(level)] = survivors;
          }
          report["mcs"][kind_name][label] = entry;
        }
      }
      if (have_benchmark) {
        report["oos_r2"]["benchmark"] = c.benchmark;
        report["oos_r2"]["p_value_convention"] = "one-sided normal";
        for (std::size_t m = 0; m < oos.models.size(); ++m) {
          report["oos_r2"]["models"][oos.models[m]] = {
              {"r2_oos_pct", oos.r2_oos_pct[m]},
              {"mspe_adj", oos.mspe_adj_stat[m]},
              {"p_value", oos.p_one_sided[m]}};
        }
      }
      auto json_out =
          open_output(fs::path(c.output_dir) / ("evaluation_h" + std::to_string(h) + ".json"));
      json_out << report.dump(2) << '\n';
    }
    std::cout << "evaluate: horizon " << h << " over " << set.dates.size() << " dates, "
              << set.models.size() << " models\n";
  }
  write_run_manifest(c, "evaluate");
  return 0;
}

int cmd_report(const RunConfig& c) {
  fs::path dir(c.output_dir);
  if (!fs::exists(dir)) throw ConfigError("report: no such directory '" + c.output_dir + "'");
  bool found = false;
  for (const char* name : {"descriptive_stats.txt", "fit_summary.txt"}) {
    fs::path p = dir / name;
    if (fs::exists(p)) {
      found = true;
      std::cout << "== " << name << " ==\n" << std::ifstream(p).rdbuf() << '\n';
    }
  }
  std::vector<fs::path> tables;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string fname = entry.path().filename().string();
    if ((fname.rfind("losses_h", 0) == 0 || fname.rfind("mcs_h", 0) == 0 ||
         fname.rfind("oos_r2_h", 0) == 0) &&
        fname.ends_with(".txt"))
      tables.push_back(entry.path());
  }
  std::sort(tables.begin(), tables.end());
  for (const auto& p : tables) {
    found = true;
    std::cout << "== " << p.filename().string() << " ==\n" << std::ifstream(p).rdbuf() << '\n';
  }
  if (!found) std::cout << "report: nothing to report in " << c.output_dir << "\n";
  return 0;
}

}  // namespace volpath
