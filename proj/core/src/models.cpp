#include "volpath/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "volpath/stats.hpp"
#include "volpath/threads.hpp"

namespace volpath {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kFailedObjective = 1e300;

struct FamilyInfo {
  const char* name;
  int lambda_blocks;
  int columns;
  int offset;  // regressor info date = target date - offset
};

const FamilyInfo& family_info(ModelFamily family) {
  static const FamilyInfo table[] = {
      {"PDV_BASE", 2, 2, 0},  {"PDV_NULL", 0, 2, 0},  {"HAR_RV", 0, 3, 1},
      {"HAR_CJ", 0, 6, 1},    {"HAR_RS", 0, 6, 1},    {"HAR_REX", 0, 9, 1},
      {"HAR_REQ", 0, 9, 1},   {"HAR_PD_RV", 1, 3, 1}, {"HAR_PD_CJ", 3, 9, 1},
      {"HAR_PD_RS", 3, 9, 1}, {"HAR_PD_REX", 4, 12, 1}, {"HAR_PD_REQ", 4, 12, 1},
      {"M1", 2, 2, 0},        {"M2", 2, 2, 0},        {"M3", 1, 1, 0},
      {"M4", 1, 1, 0},        {"M5", 1, 1, 0},
  };
  return table[static_cast<int>(family)];
}

}  // namespace

const char* family_name(ModelFamily family) { return family_info(family).name; }

ModelFamily family_from_name(const std::string& name) {
  for (int i = 0; i <= static_cast<int>(ModelFamily::M5); ++i) {
    auto family = static_cast<ModelFamily>(i);
    if (name == family_info(family).name) return family;
  }
  throw ConfigError("unknown model family '" + name + "'");
}

int lambda_block_count(ModelFamily family) { return family_info(family).lambda_blocks; }
int column_count(ModelFamily family) { return family_info(family).columns; }
int regressor_offset(ModelFamily family) { return family_info(family).offset; }

std::vector<std::string> lambda_block_names(ModelFamily family) {
  switch (family) {
    case ModelFamily::PdvBase: return {"R1", "R2"};
    case ModelFamily::HarPdRv: return {"R2"};
    case ModelFamily::HarPdCj: return {"R2", "PDCJ", "PDCV"};
    case ModelFamily::HarPdRs: return {"R1", "PDRS_pos", "PDRS_neg"};
    case ModelFamily::HarPdRex: return {"R1", "PDREX_pos", "PDREX_neg", "PDREX_mod"};
    case ModelFamily::HarPdReq: return {"R1", "PDREQ_pos", "PDREQ_neg", "PDREQ_mod"};
    case ModelFamily::M1:
    case ModelFamily::M2: return {"R1", "R2"};
    case ModelFamily::M3:
    case ModelFamily::M4:
    case ModelFamily::M5: return {"R1"};
    default: return {};
  }
}

void ModelSpec::validate() const {
  int want = lambda_block_count(family);
  if (!lambdas.empty() && static_cast<int>(lambdas.size()) != want)
    throw ConfigError(std::string(family_name(family)) + ": expected " + std::to_string(want) +
                      " kernel decays, got " + std::to_string(lambdas.size()));
  for (double l : lambdas)
    if (!(l > 0.0)) throw ConfigError("kernel decay lambda must be positive");
  if (horizons.size() != 3 || horizons[0] != 1 || horizons[1] <= horizons[0] ||
      horizons[2] <= horizons[1])
    throw ConfigError("model horizons must be {1, h2, h3} with 1 < h2 < h3");
}

std::string ModelSpec::name() const {
  std::string n = family_name(family);
  if (shrinkage == Shrinkage::Lasso) n = "LASSO_" + n;
  return n;
}

DesignInputs design_inputs_from(const Panel& panel, ComponentsPanel components,
                                FeatureConfig config) {
  DesignInputs inputs;
  inputs.dates = panel.calendar;
  inputs.closes = panel.closes();
  inputs.components = std::move(components);
  inputs.feature_config = config;
  return inputs;
}

DesignInputs design_inputs_from_series(std::vector<Date> dates, std::vector<double> closes,
                                       std::vector<double> rv, FeatureConfig config) {
  if (dates.size() != closes.size() || dates.size() != rv.size())
    throw ConfigError("design_inputs_from_series: length mismatch");
  DesignInputs inputs;
  inputs.components.dates = dates;
  inputs.components.rows.resize(dates.size());
  for (std::size_t i = 0; i < dates.size(); ++i) {
    inputs.components.rows[i].date = dates[i];
    inputs.components.rows[i].rv = rv[i];
  }
  inputs.dates = std::move(dates);
  inputs.closes = std::move(closes);
  inputs.feature_config = config;
  return inputs;
}

namespace {

struct NamedSeries {
  std::string name;
  FeatureSeries series;
};

FeatureSeries wrap(std::vector<double> values, int first_valid) {
  FeatureSeries s;
  s.values = std::move(values);
  s.first_valid = first_valid;
  s.burn_in = first_valid;
  return s;
}

// Trailing mean over the h values ending at the index itself. With rows
// indexed by the information date s, this is the mean-lag regressor
// \bar X_{t-h} evaluated at s = t-1.
FeatureSeries trailing_mean(const FeatureSeries& in, int h) {
  const int n = static_cast<int>(in.size());
  FeatureSeries out;
  out.first_valid = in.first_valid + h - 1;
  out.burn_in = in.burn_in + h - 1;
  out.values.assign(static_cast<std::size_t>(n), kNan);
  for (int t = out.first_valid; t < n; ++t) {
    double acc = 0.0;
    for (int j = 0; j < h; ++j) acc += in.values[static_cast<std::size_t>(t - j)];
    out.values[static_cast<std::size_t>(t)] = acc / h;
  }
  return out;
}

void add_lag_block(std::vector<NamedSeries>& cols, const FeatureSeries& base,
                   const std::string& name, const std::vector<int>& horizons) {
  cols.push_back({name + "_lag1", base});
  cols.push_back({name + "_mean" + std::to_string(horizons[1]), trailing_mean(base, horizons[1])});
  cols.push_back({name + "_mean" + std::to_string(horizons[2]), trailing_mean(base, horizons[2])});
}

void add_component_block(std::vector<NamedSeries>& cols, const ModelSpec& spec,
                         const DesignInputs& inputs, Component component,
                         const std::string& name) {
  add_lag_block(cols, wrap(inputs.components.column(component), 0), name, spec.horizons);
}

void add_pd_block(std::vector<NamedSeries>& cols, const ModelSpec& spec,
                  const DesignInputs& inputs, Component component, double lambda,
                  const std::string& name) {
  KernelParam k = KernelParam::from_lambda(lambda, 1e-10, inputs.feature_config.max_cutoff);
  std::vector<double> series = inputs.components.column(component);
  add_lag_block(cols, pd_transform(series, k, inputs.feature_config, name), name, spec.horizons);
}

FeatureSeries r1_series(const DesignInputs& inputs, double lambda) {
  KernelParam k = KernelParam::from_lambda(lambda, 1e-10, inputs.feature_config.max_cutoff);
  return trend_feature(inputs.closes, k, inputs.feature_config);
}

FeatureSeries r2_series(const DesignInputs& inputs, double lambda) {
  KernelParam k = KernelParam::from_lambda(lambda, 1e-10, inputs.feature_config.max_cutoff);
  return vol_feature(inputs.closes, k, inputs.feature_config);
}

FeatureSeries daily_return_series(const DesignInputs& inputs) {
  const int n = static_cast<int>(inputs.closes.size());
  FeatureSeries out;
  out.first_valid = 1;
  out.burn_in = 1;
  out.values.assign(static_cast<std::size_t>(n), kNan);
  for (int t = 1; t < n; ++t)
    out.values[static_cast<std::size_t>(t)] =
        (inputs.closes[static_cast<std::size_t>(t)] - inputs.closes[static_cast<std::size_t>(t - 1)]) /
        inputs.closes[static_cast<std::size_t>(t - 1)];
  return out;
}

FeatureSeries transformed(FeatureSeries in, const std::function<double(double)>& fn) {
  for (int t = in.first_valid; t < static_cast<int>(in.size()); ++t)
    in.values[static_cast<std::size_t>(t)] = fn(in.values[static_cast<std::size_t>(t)]);
  return in;
}

std::vector<NamedSeries> family_columns(const ModelSpec& spec, const DesignInputs& inputs) {
  const auto& l = spec.lambdas;
  std::vector<NamedSeries> cols;
  switch (spec.family) {
    case ModelFamily::PdvBase:
      cols.push_back({"R1", r1_series(inputs, l[0])});
      cols.push_back({"R2", r2_series(inputs, l[1])});
      break;
    case ModelFamily::PdvNull: {
      FeatureSeries r = daily_return_series(inputs);
      cols.push_back({"ret", r});
      cols.push_back({"ret_sq", transformed(r, [](double x) { return x * x; })});
      break;
    }
    case ModelFamily::HarRv:
      add_component_block(cols, spec, inputs, Component::Rv, "RV");
      break;
    case ModelFamily::HarCj:
      add_component_block(cols, spec, inputs, Component::Cv, "CV");
      add_component_block(cols, spec, inputs, Component::Cj, "CJ");
      break;
    case ModelFamily::HarRs:
      add_component_block(cols, spec, inputs, Component::RsPos, "RS_pos");
      add_component_block(cols, spec, inputs, Component::RsNeg, "RS_neg");
      break;
    case ModelFamily::HarRex:
      add_component_block(cols, spec, inputs, Component::RexPos, "REX_pos");
      add_component_block(cols, spec, inputs, Component::RexNeg, "REX_neg");
      add_component_block(cols, spec, inputs, Component::RexMod, "REX_mod");
      break;
    case ModelFamily::HarReq:
      add_component_block(cols, spec, inputs, Component::ReqPos, "REQ_pos");
      add_component_block(cols, spec, inputs, Component::ReqNeg, "REQ_neg");
      add_component_block(cols, spec, inputs, Component::ReqMod, "REQ_mod");
      break;
    case ModelFamily::HarPdRv:
      add_lag_block(cols, r2_series(inputs, l[0]), "R2", spec.horizons);
      break;
    case ModelFamily::HarPdCj:
      add_lag_block(cols, r2_series(inputs, l[0]), "R2", spec.horizons);
      add_pd_block(cols, spec, inputs, Component::Cj, l[1], "PDCJ");
      add_pd_block(cols, spec, inputs, Component::Cv, l[2], "PDCV");
      break;
    case ModelFamily::HarPdRs:
      add_lag_block(cols, r1_series(inputs, l[0]), "R1", spec.horizons);
      add_pd_block(cols, spec, inputs, Component::RsPos, l[1], "PDRS_pos");
      add_pd_block(cols, spec, inputs, Component::RsNeg, l[2], "PDRS_neg");
      break;
    case ModelFamily::HarPdRex:
      add_lag_block(cols, r1_series(inputs, l[0]), "R1", spec.horizons);
      add_pd_block(cols, spec, inputs, Component::RexPos, l[1], "PDREX_pos");
      add_pd_block(cols, spec, inputs, Component::RexNeg, l[2], "PDREX_neg");
      add_pd_block(cols, spec, inputs, Component::RexMod, l[3], "PDREX_mod");
      break;
    case ModelFamily::HarPdReq:
      add_lag_block(cols, r1_series(inputs, l[0]), "R1", spec.horizons);
      add_pd_block(cols, spec, inputs, Component::ReqPos, l[1], "PDREQ_pos");
      add_pd_block(cols, spec, inputs, Component::ReqNeg, l[2], "PDREQ_neg");
      add_pd_block(cols, spec, inputs, Component::ReqMod, l[3], "PDREQ_mod");
      break;
    case ModelFamily::M1: {
      cols.push_back({"R1", r1_series(inputs, l[0])});
      cols.push_back({"sqrt_R2", transformed(r2_series(inputs, l[1]),
                                             [](double x) { return std::sqrt(std::max(x, 0.0)); })});
      break;
    }
    case ModelFamily::M2:
      cols.push_back({"R1", r1_series(inputs, l[0])});
      cols.push_back({"R2", r2_series(inputs, l[1])});
      break;
    case ModelFamily::M3:
      cols.push_back({"R1", r1_series(inputs, l[0])});
      break;
    case ModelFamily::M4:
      // Centered on the design's own rows after row selection, see below.
      cols.push_back({"R1_absdev", r1_series(inputs, l[0])});
      break;
    case ModelFamily::M5:
      cols.push_back({"R1_sq", transformed(r1_series(inputs, l[0]),
                                           [](double x) { return x * x; })});
      break;
  }
  return cols;
}

void center_m4_column(DesignMatrix& design) {
  Eigen::VectorXd raw = *design.m4_raw_r1;
  double mean = raw.mean();
  for (long i = 0; i < design.rows(); ++i)
    design.columns(i, 0) = std::abs(raw(i) - mean);
}

}  // namespace

DesignMatrix build_design(const ModelSpec& spec, const DesignInputs& inputs, int shift) {
  ModelSpec checked = spec;
  checked.validate();
  if (lambda_block_count(spec.family) > 0 && spec.lambdas.empty())
    throw ConfigError(std::string(family_name(spec.family)) +
                      ": kernel decays unset; call fit_pd or supply lambdas");
  if (shift < 0) shift = regressor_offset(spec.family);
  const int n = static_cast<int>(inputs.size());
  if (shift == 0 && regressor_offset(spec.family) == 1)
    throw ConfigError("lagged HAR families require shift >= 1");

  std::vector<NamedSeries> cols = family_columns(spec, inputs);
  int first = 0;
  for (const auto& c : cols)
    first = std::max({first, c.series.first_valid, c.series.burn_in});
  int last = n - 1 - shift;
  if (last < first) {
    std::ostringstream msg;
    msg << spec.name() << ": insufficient history, need regressor rows in [" << first << ", "
        << last << "] on a " << n << "-day panel (burn-in " << first << ", target shift "
        << shift << ")";
    throw DataError(msg.str());
  }

  const auto& rv = inputs.components;
  DesignMatrix design;
  design.shift = shift;
  long rows = last - first + 1;
  design.target.resize(rows);
  design.columns.resize(rows, static_cast<long>(cols.size()));
  design.dates.reserve(static_cast<std::size_t>(rows));
  design.index.reserve(static_cast<std::size_t>(rows));
  for (int s = first; s <= last; ++s) {
    long r = s - first;
    design.dates.push_back(inputs.dates[static_cast<std::size_t>(s)]);
    design.index.push_back(s);
    design.target(r) = rv.rows[static_cast<std::size_t>(s + shift)].rv;
    for (std::size_t j = 0; j < cols.size(); ++j)
      design.columns(r, static_cast<long>(j)) = cols[j].series.values[static_cast<std::size_t>(s)];
  }
  for (auto& c : cols) design.names.push_back(std::move(c.name));

  if (!design.columns.allFinite() || !design.target.allFinite())
    throw DataError(spec.name() + ": non-finite values in design after burn-in");

  if (spec.family == ModelFamily::M4) {
    design.m4_raw_r1 = design.columns.col(0);
    center_m4_column(design);
  }
  return design;
}

DesignMatrix slice_design(const DesignMatrix& design, int first_index, int last_index) {
  long lo = -1, hi = -1;
  for (long i = 0; i < design.rows(); ++i) {
    if (design.index[static_cast<std::size_t>(i)] >= first_index && lo < 0) lo = i;
    if (design.index[static_cast<std::size_t>(i)] <= last_index) hi = i;
  }
  if (lo < 0 || hi < lo)
    throw DataError("slice_design: no rows in requested index range");
  long rows = hi - lo + 1;
  DesignMatrix out;
  out.shift = design.shift;
  out.names = design.names;
  out.target = design.target.segment(lo, rows);
  out.columns = design.columns.middleRows(lo, rows);
  out.dates.assign(design.dates.begin() + lo, design.dates.begin() + hi + 1);
  out.index.assign(design.index.begin() + lo, design.index.begin() + hi + 1);
  if (design.m4_raw_r1) {
    out.m4_raw_r1 = design.m4_raw_r1->segment(lo, rows);
    center_m4_column(out);
  }
  return out;
}

Eigen::VectorXd FitResult::beta() const {
  Eigen::VectorXd b(static_cast<long>(coefficients.size()));
  for (std::size_t i = 0; i < coefficients.size(); ++i)
    b(static_cast<long>(i)) = coefficients[i].estimate;
  return b;
}

namespace {

void check_collinearity(const DesignMatrix& design) {
  const long p = design.cols();
  const long n = design.rows();
  Eigen::VectorXd mean = design.columns.colwise().mean();
  Eigen::MatrixXd centered = design.columns.rowwise() - mean.transpose();
  Eigen::VectorXd norm(p);
  for (long j = 0; j < p; ++j) norm(j) = centered.col(j).norm();
  for (long i = 0; i < p; ++i) {
    for (long j = i + 1; j < p; ++j) {
      if (norm(i) == 0.0 || norm(j) == 0.0) continue;
      double corr = std::abs(centered.col(i).dot(centered.col(j)) / (norm(i) * norm(j)));
      if (corr > 1.0 - 1e-10)
        throw DataError("singular design: columns '" + design.names[static_cast<std::size_t>(i)] +
                        "' and '" + design.names[static_cast<std::size_t>(j)] +
                        "' are collinear (|corr| = " + format_double(corr) + ", " +
                        std::to_string(n) + " rows)");
    }
  }
}

double adjusted_r2(const Eigen::VectorXd& y, double sse, long k) {
  const long n = y.size();
  double mean = y.mean();
  double tss = (y.array() - mean).square().sum();
  double r2 = tss > 0.0 ? 1.0 - sse / tss : (sse <= 1e-300 ? 1.0 : 0.0);
  return 1.0 - (1.0 - r2) * (static_cast<double>(n) - 1.0) / (static_cast<double>(n) - static_cast<double>(k));
}

void fill_information_criteria(FitResult& fit, long n, long k) {
  double sse = std::max(fit.sse, 1e-300);
  double nn = static_cast<double>(n);
  fit.aic = nn * std::log(sse / nn) + 2.0 * static_cast<double>(k);
  fit.bic = nn * std::log(sse / nn) + static_cast<double>(k) * std::log(nn);
}

}  // namespace

FitResult ols_fit(const DesignMatrix& design, const OlsOptions& options) {
  const long n = design.rows();
  const long p = design.cols();
  if (n <= p + 1)
    throw DataError("ols_fit: need rows > columns + 1, have " + std::to_string(n) + " rows for " +
                    std::to_string(p) + " regressors");
  check_collinearity(design);

  Eigen::MatrixXd X(n, p + 1);
  X.col(0).setOnes();
  X.rightCols(p) = design.columns;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < p + 1) {
    auto perm = qr.colsPermutation().indices();
    std::string offenders;
    for (long k = qr.rank(); k < p + 1; ++k) {
      long col = perm(k);
      if (!offenders.empty()) offenders += ", ";
      offenders += col == 0 ? "intercept" : design.names[static_cast<std::size_t>(col - 1)];
    }
    throw DataError("singular design: rank " + std::to_string(qr.rank()) + " of " +
                    std::to_string(p + 1) + ", offending columns: " + offenders);
  }

  Eigen::VectorXd beta = qr.solve(design.target);
  Eigen::VectorXd residuals = design.target - X * beta;
  double sse = residuals.squaredNorm();
  long k = p + 1;

  Eigen::MatrixXd xtx_inv = (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  Eigen::VectorXd se(k);
  if (options.robust_se) {
    Eigen::MatrixXd meat = X.transpose() * residuals.array().square().matrix().asDiagonal() * X;
    Eigen::MatrixXd cov = xtx_inv * meat * xtx_inv;
    se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  } else {
    double sigma2 = sse / static_cast<double>(n - k);
    se = (sigma2 * xtx_inv.diagonal().cwiseMax(0.0)).cwiseSqrt();
  }

  FitResult fit;
  fit.coefficients.push_back({"intercept", beta(0), se(0)});
  for (long j = 0; j < p; ++j)
    fit.coefficients.push_back({design.names[static_cast<std::size_t>(j)], beta(j + 1), se(j + 1)});
  fit.sse = sse;
  fit.n_rows = n;
  fit.residuals = std::move(residuals);
  fit.adj_r2 = adjusted_r2(design.target, sse, k);
  fill_information_criteria(fit, n, k);
  return fit;
}

namespace {

DesignMatrix apply_window(const DesignMatrix& design, const RowWindow& window) {
  if (window.last_info_index < 0 && window.rows < 0) return design;
  int last = window.last_info_index >= 0 ? window.last_info_index
                                         : design.index.back();
  DesignMatrix upto = slice_design(design, design.index.front(), last);
  if (window.rows < 0) return upto;
  if (upto.rows() < window.rows)
    throw DataError("fit window needs " + std::to_string(window.rows) + " rows, only " +
                    std::to_string(upto.rows()) + " available up to index " +
                    std::to_string(last));
  int first = upto.index[upto.index.size() - static_cast<std::size_t>(window.rows)];
  return slice_design(upto, first, last);
}

// Deterministic Nelder-Mead with standard coefficients; works in the
// unconstrained log-lambda space, the objective clamps to the box.
struct SimplexPoint {
  Eigen::VectorXd x;
  double f;
};

SimplexPoint nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                         const Eigen::VectorXd& x0, double step, int max_evals, double f_tol,
                         long& evals) {
  const int d = static_cast<int>(x0.size());
  std::vector<SimplexPoint> simplex;
  simplex.reserve(static_cast<std::size_t>(d) + 1);
  simplex.push_back({x0, objective(x0)});
  ++evals;
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXd x = x0;
    x(i) += step;
    simplex.push_back({x, objective(x)});
    ++evals;
  }
  int used = d + 1;
  auto order = [&] {
    std::stable_sort(simplex.begin(), simplex.end(),
                     [](const SimplexPoint& a, const SimplexPoint& b) { return a.f < b.f; });
  };
  order();
  while (used < max_evals) {
    double spread = simplex.back().f - simplex.front().f;
    if (spread <= f_tol * (std::abs(simplex.front().f) + 1e-300)) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < d; ++i) centroid += simplex[static_cast<std::size_t>(i)].x;
    centroid /= d;
    const SimplexPoint& worst = simplex.back();

    Eigen::VectorXd xr = centroid + (centroid - worst.x);
    double fr = objective(xr);
    ++used;
    if (fr < simplex.front().f) {
      Eigen::VectorXd xe = centroid + 2.0 * (centroid - worst.x);
      double fe = objective(xe);
      ++used;
      simplex.back() = fe < fr ? SimplexPoint{xe, fe} : SimplexPoint{xr, fr};
    } else if (fr < simplex[static_cast<std::size_t>(d - 1)].f) {
      simplex.back() = {xr, fr};
    } else {
      Eigen::VectorXd xc = centroid + 0.5 * (worst.x - centroid);
      double fc = objective(xc);
      ++used;
      if (fc < worst.f) {
        simplex.back() = {xc, fc};
      } else {
        for (int i = 1; i <= d; ++i) {
          simplex[static_cast<std::size_t>(i)].x =
              simplex[0].x + 0.5 * (simplex[static_cast<std::size_t>(i)].x - simplex[0].x);
          simplex[static_cast<std::size_t>(i)].f = objective(simplex[static_cast<std::size_t>(i)].x);
          ++used;
        }
      }
    }
    order();
  }
  evals += used - (d + 1);
  return simplex.front();
}

}  // namespace

FitResult fit_pd(const ModelSpec& spec, const DesignInputs& inputs, const PdFitOptions& options,
                 int shift, const RowWindow& window) {
  const int d = lambda_block_count(spec.family);
  if (d == 0)
    throw ConfigError(std::string(family_name(spec.family)) + " has no kernel decays to estimate");
  if (!(options.lambda_lo > 0.0 && options.lambda_lo < options.lambda_hi))
    throw ConfigError("fit_pd: invalid lambda search box");

  const double lo = options.lambda_lo;
  const double hi = options.lambda_hi;

  // Profile on a common row set: the burn-in of the slowest decay in the box
  // is the worst case, so anchoring rows there keeps SSE comparable across
  // lambda values.
  RowWindow common = window;
  if (common.rows < 0) {
    ModelSpec worst = spec;
    worst.lambdas.assign(static_cast<std::size_t>(d), lo);
    DesignMatrix base = build_design(worst, inputs, shift);
    if (common.last_info_index >= 0) base = apply_window(base, common);
    common.last_info_index =
        common.last_info_index >= 0 ? common.last_info_index : base.index.back();
    common.rows = static_cast<int>(base.rows());
  }

  auto lambdas_of = [&](const Eigen::VectorXd& u) {
    std::vector<double> l(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) l[static_cast<std::size_t>(i)] = std::clamp(std::exp(u(i)), lo, hi);
    return l;
  };

  auto objective = [&](const Eigen::VectorXd& u) -> double {
    ModelSpec trial = spec;
    trial.lambdas = lambdas_of(u);
    try {
      DesignMatrix design = apply_window(build_design(trial, inputs, shift), common);
      return ols_fit(design, options.ols).sse;
    } catch (const DataError&) {
      return kFailedObjective;
    }
  };

  const int starts = std::max(1, options.multi_starts);
  std::vector<SimplexPoint> results(static_cast<std::size_t>(starts));
  std::vector<long> evals(static_cast<std::size_t>(starts), 0);
  parallel_for(static_cast<std::size_t>(starts), options.threads, [&](std::size_t i) {
    double g = starts == 1 ? std::sqrt(lo * hi)
                           : lo * std::pow(hi / lo, static_cast<double>(i) / (starts - 1.0));
    Eigen::VectorXd u0 = Eigen::VectorXd::Constant(d, std::log(g));
    results[i] = nelder_mead(objective, u0, 0.7, options.max_evals_per_start, options.f_tol,
                             evals[i]);
  });

  int best = 0;
  for (int i = 1; i < starts; ++i)
    if (results[static_cast<std::size_t>(i)].f < results[static_cast<std::size_t>(best)].f)
      best = i;
  if (results[static_cast<std::size_t>(best)].f >= kFailedObjective)
    throw DataError(spec.name() + ": kernel decay optimization failed from every start");

  ModelSpec fitted = spec;
  fitted.lambdas = lambdas_of(results[static_cast<std::size_t>(best)].x);
  DesignMatrix design = apply_window(build_design(fitted, inputs, shift), common);
  FitResult fit = ols_fit(design, options.ols);
  fit.spec = fitted;
  fit.lambdas_hat = fitted.lambdas;
  fit.lambda_at_boundary.resize(fitted.lambdas.size());
  for (std::size_t i = 0; i < fitted.lambdas.size(); ++i)
    fit.lambda_at_boundary[i] =
        fitted.lambdas[i] <= lo * (1.0 + 1e-9) || fitted.lambdas[i] >= hi * (1.0 - 1e-9);
  for (long e : evals) fit.objective_evals += e;
  fit.best_start = best;

  if (spec.family == ModelFamily::PdvBase) {
    // Eq-level sign expectations are not imposed, only reported.
    if (fit.coefficients[1].estimate > 0.0)
      fit.warnings.push_back("trend coefficient positive, expected <= 0");
    if (fit.coefficients[2].estimate < 0.0)
      fit.warnings.push_back("volatility coefficient negative, expected >= 0");
  }
  return fit;
}

std::vector<double> lasso_grid(const DesignMatrix& design, int size, double min_ratio) {
  if (size < 1) throw ConfigError("lasso_grid: size must be >= 1");
  double ybar = design.target.mean();
  Eigen::VectorXd yc = design.target.array() - ybar;
  double lambda_max = 0.0;
  for (long j = 0; j < design.cols(); ++j)
    lambda_max = std::max(lambda_max, std::abs(design.columns.col(j).dot(yc)));
  if (lambda_max <= 0.0) lambda_max = 1.0;
  std::vector<double> grid(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i)
    grid[static_cast<std::size_t>(i)] =
        size == 1 ? lambda_max
                  : lambda_max * std::pow(min_ratio, static_cast<double>(i) / (size - 1.0));
  return grid;
}

FitResult lasso_fit(const DesignMatrix& design, double penalty, const LassoOptions& options) {
  if (penalty < 0.0) throw ConfigError("lasso_fit: penalty must be >= 0");
  const long n = design.rows();
  const long p = design.cols();
  if (n < 2) throw DataError("lasso_fit: need at least 2 rows");

  Eigen::VectorXd xbar = design.columns.colwise().mean();
  Eigen::VectorXd scale(p);
  Eigen::MatrixXd xs = design.columns.rowwise() - xbar.transpose();
  for (long j = 0; j < p; ++j) {
    scale(j) = std::sqrt(xs.col(j).squaredNorm() / static_cast<double>(n));
    if (scale(j) > 0.0) xs.col(j) /= scale(j);
  }
  double ybar = design.target.mean();
  Eigen::VectorXd r = design.target.array() - ybar;  // residual at b = 0

  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);  // standardized-scale slopes
  Eigen::VectorXd znorm(p);
  for (long j = 0; j < p; ++j) znorm(j) = xs.col(j).squaredNorm();

  long sweeps = 0;
  double max_change = 0.0;
  bool converged = false;
  std::vector<double> trace;
  auto objective = [&] {
    double l1 = 0.0;
    for (long j = 0; j < p; ++j)
      if (scale(j) > 0.0) l1 += std::abs(b(j)) / scale(j);
    return 0.5 * r.squaredNorm() + penalty * l1;
  };
  while (sweeps < options.max_sweeps) {
    ++sweeps;
    max_change = 0.0;
    for (long j = 0; j < p; ++j) {
      if (scale(j) == 0.0 || znorm(j) == 0.0) continue;
      double old = b(j);
      double c = xs.col(j).dot(r) + znorm(j) * old;
      double threshold = penalty / scale(j);
      double updated = 0.0;
      if (c > threshold)
        updated = (c - threshold) / znorm(j);
      else if (c < -threshold)
        updated = (c + threshold) / znorm(j);
      if (updated != old) {
        r -= xs.col(j) * (updated - old);
        b(j) = updated;
        max_change = std::max(max_change, std::abs(updated - old) / scale(j));
      }
    }
    if (trace.size() < 10000) trace.push_back(objective());
    if (max_change < options.tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw DataError("lasso_fit: no convergence after " + std::to_string(sweeps) +
                    " sweeps, last max coefficient change " + format_double(max_change));

  Eigen::VectorXd beta(p);
  for (long j = 0; j < p; ++j) beta(j) = scale(j) > 0.0 ? b(j) / scale(j) : 0.0;
  double beta0 = ybar - beta.dot(xbar);

  FitResult fit;
  fit.penalty = penalty;
  fit.sweeps = sweeps;
  fit.objective_trace = std::move(trace);
  fit.n_rows = n;
  fit.residuals = design.target - (design.columns * beta).array().matrix() -
                  Eigen::VectorXd::Constant(n, beta0);
  fit.sse = fit.residuals.squaredNorm();

  std::vector<long> support_idx;
  for (long j = 0; j < p; ++j)
    if (beta(j) != 0.0) support_idx.push_back(j);

  // Standard errors: post-selection OLS on the selected support.
  Eigen::VectorXd se = Eigen::VectorXd::Constant(p, kNan);
  double se0 = kNan;
  if (!support_idx.empty() &&
      n > static_cast<long>(support_idx.size()) + 1) {
    DesignMatrix sub;
    sub.shift = design.shift;
    sub.dates = design.dates;
    sub.index = design.index;
    sub.target = design.target;
    sub.columns.resize(n, static_cast<long>(support_idx.size()));
    for (std::size_t k = 0; k < support_idx.size(); ++k) {
      sub.columns.col(static_cast<long>(k)) = design.columns.col(support_idx[k]);
      sub.names.push_back(design.names[static_cast<std::size_t>(support_idx[k])]);
    }
    try {
      FitResult post = ols_fit(sub);
      se0 = post.coefficients[0].se;
      for (std::size_t k = 0; k < support_idx.size(); ++k)
        se(support_idx[k]) = post.coefficients[k + 1].se;
    } catch (const DataError& err) {
      fit.warnings.push_back(std::string("post-selection inference unavailable: ") + err.what());
    }
  }

  fit.coefficients.push_back({"intercept", beta0, se0});
  for (long j = 0; j < p; ++j) {
    fit.coefficients.push_back({design.names[static_cast<std::size_t>(j)], beta(j), se(j)});
    if (beta(j) != 0.0) fit.support.push_back(design.names[static_cast<std::size_t>(j)]);
  }
  long k = static_cast<long>(support_idx.size()) + 1;
  fit.adj_r2 = adjusted_r2(design.target, fit.sse, k);
  fill_information_criteria(fit, n, k);
  return fit;
}

LassoCvResult lasso_cv(const DesignMatrix& design, std::span<const double> grid, int folds,
                       const LassoOptions& options) {
  if (folds < 2) throw ConfigError("lasso_cv: folds must be >= 2");
  if (grid.empty()) throw ConfigError("lasso_cv: empty penalty grid");
  const long n = design.rows();

  std::vector<long> bounds(static_cast<std::size_t>(folds) + 1);
  for (int f = 0; f <= folds; ++f)
    bounds[static_cast<std::size_t>(f)] = n * f / folds;
  for (int f = 0; f < folds; ++f)
    if (bounds[static_cast<std::size_t>(f) + 1] - bounds[static_cast<std::size_t>(f)] < 2)
      throw ConfigError("lasso_cv: fold " + std::to_string(f) + " has fewer than 2 rows");

  // Penalties are evaluated in descending order so ties resolve to the
  // sparser fit.
  std::vector<double> ordered(grid.begin(), grid.end());
  std::sort(ordered.begin(), ordered.end(), std::greater<>());

  std::vector<double> cv_mse(ordered.size(), 0.0);
  for (int f = 0; f < folds; ++f) {
    long lo = bounds[static_cast<std::size_t>(f)];
    long hi = bounds[static_cast<std::size_t>(f) + 1];  // exclusive
    long train_rows = n - (hi - lo);
    DesignMatrix train;
    train.shift = design.shift;
    train.names = design.names;
    train.target.resize(train_rows);
    train.columns.resize(train_rows, design.cols());
    long r = 0;
    for (long i = 0; i < n; ++i) {
      if (i >= lo && i < hi) continue;
      train.target(r) = design.target(i);
      train.columns.row(r) = design.columns.row(i);
      train.dates.push_back(design.dates[static_cast<std::size_t>(i)]);
      train.index.push_back(design.index[static_cast<std::size_t>(i)]);
      ++r;
    }
    for (std::size_t g = 0; g < ordered.size(); ++g) {
      FitResult fit = lasso_fit(train, ordered[g], options);
      Eigen::VectorXd beta = fit.beta();
      double mse = 0.0;
      for (long i = lo; i < hi; ++i) {
        double pred = beta(0) + design.columns.row(i).dot(beta.tail(design.cols()));
        double err = design.target(i) - pred;
        mse += err * err;
      }
      cv_mse[g] += mse / static_cast<double>(hi - lo);
    }
  }
  for (auto& m : cv_mse) m /= folds;

  std::size_t best = 0;
  for (std::size_t g = 1; g < ordered.size(); ++g)
    if (cv_mse[g] < cv_mse[best]) best = g;

  LassoCvResult out;
  out.penalty = ordered[best];
  out.grid = std::move(ordered);
  out.cv_mse = std::move(cv_mse);
  out.fit = lasso_fit(design, out.penalty, options);
  return out;
}

AcfResult residual_acf(const FitResult& fit, int max_lag) {
  if (fit.residuals.size() <= max_lag)
    throw DataError("residual_acf: residual series shorter than max_lag");
  AcfResult out;
  std::vector<double> r(fit.residuals.data(), fit.residuals.data() + fit.residuals.size());
  out.acf = autocorrelations(r, max_lag);
  out.band = 1.96 / std::sqrt(static_cast<double>(r.size()));
  return out;
}

FitResult fit_model(const ModelSpec& spec, const DesignInputs& inputs, const FitOptions& options,
                    int shift, const RowWindow& window) {
  spec.validate();
  FitResult base;
  ModelSpec resolved = spec;
  if (lambda_block_count(spec.family) > 0 && spec.lambdas.empty()) {
    PdFitOptions pd = options.pd;
    pd.ols = options.ols;
    base = fit_pd(spec, inputs, pd, shift, window);
    resolved.lambdas = base.lambdas_hat;
  } else {
    DesignMatrix design = apply_window(build_design(resolved, inputs, shift), window);
    base = ols_fit(design, options.ols);
    base.spec = resolved;
    base.lambdas_hat = resolved.lambdas;
  }
  if (spec.shrinkage != Shrinkage::Lasso) return base;

  DesignMatrix design = apply_window(build_design(resolved, inputs, shift), window);
  std::vector<double> grid = lasso_grid(design, options.grid_size, options.grid_min_ratio);
  LassoCvResult cv = lasso_cv(design, grid, options.cv_folds, options.lasso);
  FitResult fit = std::move(cv.fit);
  fit.spec = resolved;
  fit.spec.shrinkage = Shrinkage::Lasso;
  fit.lambdas_hat = resolved.lambdas;
  fit.lambda_at_boundary = base.lambda_at_boundary;
  fit.objective_evals = base.objective_evals;
  fit.best_start = base.best_start;
  return fit;
}

std::string fit_result_json(const FitResult& fit) {
  nlohmann::json j;
  j["model"] = fit.spec.name();
  j["family"] = family_name(fit.spec.family);
  j["shrinkage"] = fit.spec.shrinkage == Shrinkage::Lasso ? "lasso" : "none";
  auto blocks = lambda_block_names(fit.spec.family);
  if (!blocks.empty()) {
    j["lambda_blocks"] = blocks;
    j["lambdas_hat"] = fit.lambdas_hat;
    j["lambda_at_boundary"] = fit.lambda_at_boundary;
  }
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& c : fit.coefficients) {
    nlohmann::json row;
    row["name"] = c.name;
    row["estimate"] = c.estimate;
    if (std::isfinite(c.se)) row["se"] = c.se;
    coeffs.push_back(row);
  }
  j["coefficients"] = coeffs;
  j["adj_r2"] = fit.adj_r2;
  j["aic"] = fit.aic;
  j["bic"] = fit.bic;
  j["sse"] = fit.sse;
  j["n_rows"] = fit.n_rows;
  if (fit.spec.shrinkage == Shrinkage::Lasso) {
    j["lasso"]["penalty"] = fit.penalty;
    j["lasso"]["support"] = fit.support;
    j["lasso"]["sweeps"] = fit.sweeps;
  }
  if (fit.objective_evals > 0) {
    j["convergence"]["objective_evals"] = fit.objective_evals;
    j["convergence"]["best_start"] = fit.best_start;
  }
  if (!fit.warnings.empty()) j["warnings"] = fit.warnings;
  return j.dump(2);
}

std::string fit_result_text(const FitResult& fit) {
  std::ostringstream out;
  out << fit.spec.name() << "  (n = " << fit.n_rows << ")\n";
  auto blocks = lambda_block_names(fit.spec.family);
  for (std::size_t i = 0; i < fit.lambdas_hat.size(); ++i) {
    out << "  lambda[" << (i < blocks.size() ? blocks[i] : std::to_string(i)) << "] = "
        << format_double(fit.lambdas_hat[i]);
    if (i < fit.lambda_at_boundary.size() && fit.lambda_at_boundary[i]) out << "  (boundary)";
    out << '\n';
  }
  char line[160];
  std::snprintf(line, sizeof(line), "  %-16s %14s %14s\n", "coefficient", "estimate", "se");
  out << line;
  for (const auto& c : fit.coefficients) {
    std::snprintf(line, sizeof(line), "  %-16s %14.6g %14.6g\n", c.name.c_str(), c.estimate, c.se);
    out << line;
  }
  std::snprintf(line, sizeof(line), "  adj_r2 %.4f  aic %.2f  bic %.2f\n", fit.adj_r2, fit.aic,
                fit.bic);
  out << line;
  if (fit.spec.shrinkage == Shrinkage::Lasso) {
    out << "  lasso penalty " << format_double(fit.penalty) << ", support:";
    for (const auto& s : fit.support) out << ' ' << s;
    out << '\n';
  }
  for (const auto& w : fit.warnings) out << "  warning: " << w << '\n';
  return out.str();
}

}  // namespace volpath
