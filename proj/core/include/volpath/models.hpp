#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "volpath/estimators.hpp"
#include "volpath/features.hpp"

namespace volpath {

enum class ModelFamily {
  PdvBase,  // rv ~ R1 + R2, contemporaneous
  PdvNull,  // rv ~ r + r^2, plain daily return, no kernel
  HarRv, HarCj, HarRs, HarRex, HarReq,
  HarPdRv, HarPdCj, HarPdRs, HarPdRex, HarPdReq,
  M1, M2, M3, M4, M5,
};

enum class Shrinkage { None, Lasso };

const char* family_name(ModelFamily family);
ModelFamily family_from_name(const std::string& name);

/// Number of kernel-decay parameters the family carries, one per regressor
/// block in the order the blocks enter the regression.
int lambda_block_count(ModelFamily family);
std::vector<std::string> lambda_block_names(ModelFamily family);

/// Regressor count excluding the intercept.
int column_count(ModelFamily family);

/// Natural target alignment: 1 for the lagged HAR-style regressions,
/// 0 for the contemporaneous feature regressions.
int regressor_offset(ModelFamily family);

struct ModelSpec {
  ModelFamily family = ModelFamily::HarRv;
  std::vector<double> lambdas;  // empty means "estimate via fit_pd"
  std::vector<int> horizons = {1, 5, 22};  // lag set of the HAR-style blocks
  Shrinkage shrinkage = Shrinkage::None;

  void validate() const;  // lambda count matches the family, all positive
  std::string name() const;
};

/// Everything regressors derive from: the daily calendar, closes, the
/// estimator panel and the feature conventions in effect.
struct DesignInputs {
  std::vector<Date> dates;
  std::vector<double> closes;
  ComponentsPanel components;
  FeatureConfig feature_config;

  std::size_t size() const { return dates.size(); }
};

DesignInputs design_inputs_from(const Panel& panel, ComponentsPanel components,
                                FeatureConfig config = {});

/// Minimal inputs for the daily feature regressions (M1..M5, PDV base/null):
/// a close series and an rv series, no intraday panel required.
DesignInputs design_inputs_from_series(std::vector<Date> dates, std::vector<double> closes,
                                       std::vector<double> rv, FeatureConfig config = {});

/// Rows are indexed by the regressor information date s; the target is rv at
/// s + shift. Burn-in rows are dropped, so every stored row is finite.
struct DesignMatrix {
  std::vector<Date> dates;  // information date per row
  std::vector<int> index;   // panel index of the information date per row
  Eigen::VectorXd target;
  Eigen::MatrixXd columns;  // no intercept column
  std::vector<std::string> names;
  int shift = 1;

  // M4 keeps its raw trend column so window slices can re-center the
  // absolute-deviation regressor on their own rows.
  std::optional<Eigen::VectorXd> m4_raw_r1;

  long rows() const { return target.size(); }
  long cols() const { return columns.cols(); }
};

/// Builds the family's design. shift < 0 selects the family's natural
/// alignment (regressor_offset); forecasting passes the horizon explicitly.
DesignMatrix build_design(const ModelSpec& spec, const DesignInputs& inputs, int shift = -1);

struct Coefficient {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
};

struct FitResult {
  ModelSpec spec;
  std::vector<Coefficient> coefficients;  // intercept first
  double sse = 0.0;
  double adj_r2 = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  long n_rows = 0;
  Eigen::VectorXd residuals;

  // Kernel decays (profiled families)
  std::vector<double> lambdas_hat;
  std::vector<bool> lambda_at_boundary;
  long objective_evals = 0;
  int best_start = -1;

  // Shrinkage (lasso fits)
  double penalty = 0.0;
  std::vector<std::string> support;  // selected slope names
  long sweeps = 0;
  std::vector<double> objective_trace;  // objective after each sweep

  std::vector<std::string> warnings;

  Eigen::VectorXd beta() const;  // intercept first
};

struct OlsOptions {
  bool robust_se = false;  // HC0 sandwich instead of classical
};

/// Least squares with classical inference. Throws DataError on rank
/// deficiency or near-exact collinearity, naming the offending columns.
FitResult ols_fit(const DesignMatrix& design, const OlsOptions& options = {});

/// Restricts a design to rows whose information index lies in
/// [first_index, last_index].
DesignMatrix slice_design(const DesignMatrix& design, int first_index, int last_index);

struct RowWindow {
  int last_info_index = -1;  // inclusive; -1 means the last row available
  int rows = -1;             // exact row count required; -1 means all
};

struct PdFitOptions {
  double lambda_lo = 0.01;
  double lambda_hi = 50.0;
  int multi_starts = 5;
  int max_evals_per_start = 200;
  double f_tol = 1e-12;  // relative SSE spread tolerance for the simplex
  OlsOptions ols;
  int threads = 1;
};

/// Profiled nonlinear least squares for the kernel decays: the inner problem
/// rebuilds the design and solves OLS at fixed lambdas; the outer problem
/// minimizes the inner SSE by Nelder-Mead in log-lambda space with
/// log-spaced multi-starts. Deterministic for fixed options.
FitResult fit_pd(const ModelSpec& spec, const DesignInputs& inputs,
                 const PdFitOptions& options = {}, int shift = -1,
                 const RowWindow& window = {});

struct LassoOptions {
  double tol = 1e-9;        // max original-scale coefficient change per sweep
  long max_sweeps = 100000;
};

/// Cyclic coordinate descent for 0.5 * sum (y - b0 - x'b)^2 + penalty * sum|b_j|
/// with the intercept unpenalized. Descent runs on standardized columns;
/// coefficients are reported on the original scale. Standard errors are the
/// post-selection OLS values on the selected support.
FitResult lasso_fit(const DesignMatrix& design, double penalty,
                    const LassoOptions& options = {});

std::vector<double> lasso_grid(const DesignMatrix& design, int size = 100,
                               double min_ratio = 1e-4);

struct LassoCvResult {
  double penalty = 0.0;
  FitResult fit;
  std::vector<double> grid;
  std::vector<double> cv_mse;  // mean validation MSE per grid point
};

/// K-fold cross-validation over contiguous time blocks; selects the penalty
/// minimizing mean validation MSE (ties resolve to the larger penalty) and
/// refits on all rows.
LassoCvResult lasso_cv(const DesignMatrix& design, std::span<const double> grid, int folds,
                       const LassoOptions& options = {});

struct AcfResult {
  std::vector<double> acf;
  double band = 0.0;  // +-1.96 / sqrt(N)
};

AcfResult residual_acf(const FitResult& fit, int max_lag);

struct FitOptions {
  PdFitOptions pd;
  LassoOptions lasso;
  int cv_folds = 10;
  int grid_size = 100;
  double grid_min_ratio = 1e-4;
  OlsOptions ols;
};

/// One-stop driver used by the CLI and the forecaster: estimates kernel
/// decays when the model leaves them open, then fits by OLS or
/// cross-validated lasso per the model's shrinkage.
FitResult fit_model(const ModelSpec& spec, const DesignInputs& inputs,
                    const FitOptions& options = {}, int shift = -1,
                    const RowWindow& window = {});

std::string fit_result_json(const FitResult& fit);
std::string fit_result_text(const FitResult& fit);

}  // namespace volpath
