#pragma once

#include <array>
#include <ostream>
#include <span>
#include <vector>

#include "volpath/ingest.hpp"

namespace volpath {

/// Per-day estimator panel row. cj + cv == rv, the rex triple sums to rv and
/// the req triple sums to rv on every day; degenerate situations are flagged
/// rather than aborting the panel build.
struct DailyComponents {
  Date date{};
  double rv = 0, rbv = 0, rtq = 0;
  double z = 0;
  double cj = 0, cv = 0;
  double rs_pos = 0, rs_neg = 0;
  double rex_neg = 0, rex_pos = 0, rex_mod = 0;
  double req_neg = 0, req_pos = 0, req_mod = 0;
  bool z_defined = true;       // false when rv == 0 or rbv == 0
  bool rex_degenerate = false; // day volatility 0, thresholds collapse
  bool req_degenerate = false; // all returns equal, quantiles collapse
};

struct ThresholdPolicy {
  enum class Kind { NormalCdf, EmpiricalQuantile };
  Kind kind = Kind::NormalCdf;
  double alpha = 0.05;  // tail probability, must lie in (0, 0.5)

  void validate() const;
};

struct ComponentsConfig {
  double jump_alpha = 0.05;  // Z-test tail for the CJ/CV split
  double rex_alpha = 0.05;   // normal-CDF tail for REX thresholds
  double req_low = 0.05;     // empirical quantile pair for REQ
  double req_high = 0.95;
};

// ---- per-day estimators ----

double realized_variance(const TradingDay& day);

/// Jump-robust bipower variation, (n / (mu1^2 (n-1))) sum |r_{i-1}||r_i|
/// with mu1^2 = 2/pi. Requires n >= 2.
double bipower_variation(const TradingDay& day);

/// Tripower quarticity with the 4/3-power moment constant
/// mu_{4/3} = 2^{2/3} Gamma(1/6) / (6 sqrt(pi)). Requires n >= 5.
double tripower_quarticity(const TradingDay& day);

double tripower_moment_constant();  // mu_{4/3}

/// Relative-jump Z statistic. Throws DataError when rv or rbv is zero; the
/// panel builder records such days as z-undefined with cj = 0.
double jump_z(double rv, double rbv, double rtq, int n);

struct CjCv {
  double cj = 0, cv = 0;
};

/// cj = 1{z > phi_{1-alpha}} max(rv - rbv, 0), cv = rv - cj. Truncation at
/// zero keeps cj + cv == rv even when rv < rbv.
CjCv split_cj_cv(double rv, double rbv, double z, double alpha);

struct Semivariance {
  double rs_pos = 0, rs_neg = 0;
};

Semivariance semivariance(const TradingDay& day);

struct Decomposition {
  double neg = 0, pos = 0, mod = 0;
  bool degenerate = false;
};

/// Extreme/moderate split with normal-CDF thresholds scaled by sigma_t. The
/// tails are closed intervals, the moderate band open.
Decomposition rex_decompose(const TradingDay& day, double sigma_t, double alpha);

/// Same split with the day's own empirical quantiles as thresholds.
Decomposition req_decompose(const TradingDay& day, double q_low, double q_high);

/// Sample standard deviation of the day's intraday returns (the sigma_t fed
/// to rex_decompose).
double day_return_std(const TradingDay& day);

struct LjungBoxResult {
  double statistic = 0;
  double p_value = 1;
};

LjungBoxResult ljung_box(std::span<const double> series, int lags);

struct Describe {
  double mean = 0, std_dev = 0, skewness = 0, kurtosis = 0;
  double max = 0, min = 0;
};

/// Moment summary; kurtosis is raw (not excess). Skewness and kurtosis of a
/// constant series are reported as NaN.
Describe describe(std::span<const double> series);

// ---- panel-level driver ----

enum class Component {
  Rv, Rbv, Rtq, Z, Cj, Cv, RsPos, RsNeg,
  RexNeg, RexPos, RexMod, ReqNeg, ReqPos, ReqMod,
};
inline constexpr int kComponentCount = 14;
extern const std::array<const char*, kComponentCount> kComponentNames;

Component component_from_name(const std::string& name);

DailyComponents compute_components(const TradingDay& day, const ComponentsConfig& config);

struct ComponentsPanel {
  std::vector<Date> dates;
  std::vector<DailyComponents> rows;

  std::size_t size() const { return rows.size(); }
  std::vector<double> column(Component c) const;
};

/// Computes every day's components. Days are independent, so the work is
/// split across `threads` workers with deterministic output.
ComponentsPanel components_panel(const Panel& panel, const ComponentsConfig& config,
                                 int threads = 1);

/// Fixed-order CSV export at full double precision.
void write_components_csv(std::ostream& out, const ComponentsPanel& panel);
ComponentsPanel read_components_csv(std::istream& in);

}  // namespace volpath
