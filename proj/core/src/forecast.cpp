#include "volpath/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "volpath/csv.hpp"
#include "volpath/threads.hpp"

namespace volpath {

void ForecastConfig::validate() const {
  if (window < 1) throw ConfigError("forecast: window H must be >= 1");
  if (horizon < 1) throw ConfigError("forecast: horizon h must be >= 1");
  if (out_len < 1) throw ConfigError("forecast: out-of-sample length M must be >= 1");
  if (refit_lambda_every < 1) throw ConfigError("forecast: refit_lambda_every must be >= 1");
  if (!(floor_epsilon > 0.0)) throw ConfigError("forecast: floor epsilon must be positive");
}

namespace {

struct AnchorFit {
  std::vector<double> lambdas;
  double penalty = 0.0;
  DesignMatrix design;  // full-panel design at the anchor's lambdas
};

double predict_row(const DesignMatrix& full, long row, const Eigen::VectorXd& beta,
                   const DesignMatrix& window) {
  double x0;
  if (full.m4_raw_r1) {
    double window_mean = window.m4_raw_r1->mean();
    x0 = std::abs((*full.m4_raw_r1)(row)-window_mean);
    return beta(0) + beta(1) * x0;
  }
  return beta(0) + full.columns.row(row).dot(beta.tail(full.cols()));
}

}  // namespace

ForecastRun rolling_forecast(const ModelSpec& spec, const DesignInputs& inputs,
                             const ForecastConfig& config, const FitOptions& options,
                             int threads) {
  spec.validate();
  config.validate();
  const int N = static_cast<int>(inputs.size());
  const int H = config.window;
  const int h = config.horizon;
  const int M = config.out_len;

  const int o_first = N - M - 1;
  const int o_last = N - 1 - h;
  if (o_first < 0 || o_last < o_first) {
    std::ostringstream msg;
    msg << "rolling_forecast: panel of " << N << " days cannot host out-of-sample length " << M
        << " at horizon " << h << " (need at least " << M + h << " days past the fit window)";
    throw DataError(msg.str());
  }

  const bool has_lambdas = lambda_block_count(spec.family) > 0 && spec.lambdas.empty();
  const bool has_lasso = spec.shrinkage == Shrinkage::Lasso;

  // Feasibility of the first fit window is checked against the worst-case
  // burn-in (slowest decay in the search box when decays are estimated).
  ModelSpec probe = spec;
  if (has_lambdas)
    probe.lambdas.assign(static_cast<std::size_t>(lambda_block_count(spec.family)),
                         options.pd.lambda_lo);
  DesignMatrix probe_design = build_design(probe, inputs, h);
  const int s_first = probe_design.index.front();
  const int o_feasible = s_first + H + h - 1;
  if (o_first < o_feasible) {
    std::ostringstream msg;
    msg << "rolling_forecast: first origin index " << o_first << " needs " << H
        << " fit rows at horizon " << h << " after a burn-in of " << s_first
        << " days; earliest feasible origin is " << o_feasible << ". Required panel length "
        << o_feasible + M + 1 << ", available " << N;
    throw DataError(msg.str());
  }

  // Anchors are absolute panel positions, so any origin's estimate is a pure
  // function of (panel, config, origin).
  auto anchor_of = [&](int origin) {
    int a = origin / config.refit_lambda_every * config.refit_lambda_every;
    return std::max(a, o_feasible);
  };

  std::vector<int> anchors;
  for (int o = o_first; o <= o_last; ++o) {
    int a = anchor_of(o);
    if (anchors.empty() || anchors.back() != a) anchors.push_back(a);
  }
  std::sort(anchors.begin(), anchors.end());
  anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());

  std::map<int, AnchorFit> anchor_fits;
  for (int a : anchors) anchor_fits[a] = {};
  {
    std::vector<int> keys(anchors.begin(), anchors.end());
    parallel_for(keys.size(), threads, [&](std::size_t i) {
      int a = keys[i];
      AnchorFit af;
      RowWindow window{a - h, H};
      ModelSpec resolved = spec;
      if (has_lambdas) {
        PdFitOptions pd = options.pd;
        pd.ols = options.ols;
        pd.threads = 1;
        FitResult pd_fit = fit_pd(spec, inputs, pd, h, window);
        resolved.lambdas = pd_fit.lambdas_hat;
      }
      af.lambdas = resolved.lambdas;
      af.design = build_design(resolved, inputs, h);
      if (has_lasso) {
        DesignMatrix fitw = slice_design(af.design, a - h - H + 1, a - h);
        std::vector<double> grid = lasso_grid(fitw, options.grid_size, options.grid_min_ratio);
        LassoCvResult cv = lasso_cv(fitw, grid, options.cv_folds, options.lasso);
        af.penalty = cv.penalty;
      }
      anchor_fits.at(a) = std::move(af);
    });
  }

  ForecastRun run;
  run.spec = spec;
  run.config = config;
  for (int a : anchors) {
    const AnchorFit& af = anchor_fits[a];
    run.refits.push_back({a, inputs.dates[static_cast<std::size_t>(a)], af.lambdas, af.penalty});
  }

  const int count = o_last - o_first + 1;
  run.records.resize(static_cast<std::size_t>(count));
  std::vector<long> floored(static_cast<std::size_t>(count), 0);
  parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t i) {
    int o = o_first + static_cast<int>(i);
    const AnchorFit& af = anchor_fits.at(anchor_of(o));
    DesignMatrix window = slice_design(af.design, o - h - H + 1, o - h);
    if (window.rows() != H)
      throw DataError("rolling_forecast: fit window at origin " + std::to_string(o) + " has " +
                      std::to_string(window.rows()) + " rows, expected " + std::to_string(H));
    FitResult fit = has_lasso ? lasso_fit(window, af.penalty, options.lasso)
                              : ols_fit(window, options.ols);
    Eigen::VectorXd beta = fit.beta();
    long row_o = o - af.design.index.front();
    double predicted = predict_row(af.design, row_o, beta, window);
    if (predicted < config.floor_epsilon) {
      predicted = config.floor_epsilon;
      floored[i] = 1;
    }
    run.records[i] = {inputs.dates[static_cast<std::size_t>(o + h)], h, predicted,
                      inputs.components.rows[static_cast<std::size_t>(o + h)].rv};
  });
  for (long f : floored) run.floor_count += f;
  return run;
}

std::vector<ForecastRecord> import_external_forecasts(std::istream& in,
                                                      const ComponentsPanel& components,
                                                      std::vector<std::string>* unmatched) {
  CsvReader reader(in);
  int date_col = reader.column("date");
  int horizon_col = reader.column("horizon");
  int pred_col = reader.column("predicted");
  if (date_col < 0 || horizon_col < 0 || pred_col < 0)
    throw ConfigError("external forecast CSV needs columns date,horizon,predicted");

  std::map<Date, double> realized;
  for (const auto& row : components.rows) realized[row.date] = row.rv;

  std::vector<ForecastRecord> records;
  std::vector<std::string> row;
  const int needed = std::max({date_col, horizon_col, pred_col}) + 1;
  while (reader.next(row)) {
    if (static_cast<int>(row.size()) < needed)
      throw DataError("external forecast CSV: short row at line " + std::to_string(reader.line()));
    ForecastRecord r;
    r.target_date = parse_date(row[static_cast<std::size_t>(date_col)]);
    r.horizon = std::atoi(row[static_cast<std::size_t>(horizon_col)].c_str());
    r.predicted = std::strtod(row[static_cast<std::size_t>(pred_col)].c_str(), nullptr);
    auto it = realized.find(r.target_date);
    if (it == realized.end()) {
      if (unmatched) unmatched->push_back(to_string(r.target_date));
      continue;
    }
    r.realized = it->second;
    records.push_back(r);
  }
  if (records.empty())
    throw DataError("import_external_forecasts: no forecast date overlaps the panel");
  return records;
}

void write_forecast_csv(std::ostream& out, std::span<const ForecastRecord> records) {
  out << "date,horizon,predicted,realized\n";
  for (const auto& r : records) {
    out << to_string(r.target_date) << ',' << r.horizon << ',' << format_double(r.predicted)
        << ',' << format_double(r.realized) << '\n';
  }
}

std::vector<ForecastRecord> read_forecast_csv(std::istream& in) {
  CsvReader reader(in);
  int date_col = reader.column("date");
  int horizon_col = reader.column("horizon");
  int pred_col = reader.column("predicted");
  int real_col = reader.column("realized");
  if (date_col < 0 || horizon_col < 0 || pred_col < 0 || real_col < 0)
    throw ConfigError("forecast CSV needs columns date,horizon,predicted,realized");
  std::vector<ForecastRecord> records;
  std::vector<std::string> row;
  const int needed = std::max({date_col, horizon_col, pred_col, real_col}) + 1;
  while (reader.next(row)) {
    if (static_cast<int>(row.size()) < needed)
      throw DataError("forecast CSV: short row at line " + std::to_string(reader.line()));
    ForecastRecord r;
    r.target_date = parse_date(row[static_cast<std::size_t>(date_col)]);
    r.horizon = std::atoi(row[static_cast<std::size_t>(horizon_col)].c_str());
    r.predicted = std::strtod(row[static_cast<std::size_t>(pred_col)].c_str(), nullptr);
    r.realized = std::strtod(row[static_cast<std::size_t>(real_col)].c_str(), nullptr);
    records.push_back(r);
  }
  return records;
}

std::string forecast_meta_json(const ForecastRun& run) {
  nlohmann::json j;
  j["model"] = run.spec.name();
  j["horizon"] = run.config.horizon;
  j["window"] = run.config.window;
  j["out_len"] = run.config.out_len;
  j["refit_lambda_every"] = run.config.refit_lambda_every;
  j["floor_epsilon"] = run.config.floor_epsilon;
  j["floor_count"] = run.floor_count;
  j["records"] = run.records.size();
  nlohmann::json refits = nlohmann::json::array();
  for (const auto& r : run.refits) {
    nlohmann::json e;
    e["origin_index"] = r.origin_index;
    e["origin_date"] = to_string(r.origin_date);
    if (!r.lambdas.empty()) e["lambdas"] = r.lambdas;
    if (run.spec.shrinkage == Shrinkage::Lasso) e["lasso_penalty"] = r.lasso_penalty;
    refits.push_back(e);
  }
  j["refits"] = refits;
  if (lambda_block_count(run.spec.family) > 0 && run.spec.lambdas.empty())
    j["note"] = "kernel decays re-estimated at anchored origins, OLS refit every origin";
  return j.dump(2);
}

}  // namespace volpath
