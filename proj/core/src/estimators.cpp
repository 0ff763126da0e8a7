#include "volpath/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "volpath/csv.hpp"
#include "volpath/stats.hpp"
#include "volpath/threads.hpp"

namespace volpath {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kMu1SqInv = std::numbers::pi / 2.0;  // 1 / mu1^2, mu1^2 = 2/pi
}  // namespace

void ThresholdPolicy::validate() const {
  if (!(alpha > 0.0 && alpha < 0.5))
    throw ConfigError("threshold tail probability must lie in (0, 0.5)");
}

double realized_variance(const TradingDay& day) {
  if (day.n() < 1) throw DataError("realized_variance: empty day " + to_string(day.date));
  double s = 0.0;
  for (double r : day.returns) s += r * r;
  return s;
}

double bipower_variation(const TradingDay& day) {
  const int n = day.n();
  if (n < 2)
    throw DataError("bipower_variation: need at least 2 returns, day " + to_string(day.date));
  double s = 0.0;
  for (int i = 1; i < n; ++i)
    s += std::abs(day.returns[i - 1]) * std::abs(day.returns[i]);
  return static_cast<double>(n) / (n - 1.0) * kMu1SqInv * s;
}

double tripower_moment_constant() {
  static const double mu43 =
      std::pow(2.0, 2.0 / 3.0) * std::tgamma(1.0 / 6.0) / (6.0 * std::sqrt(std::numbers::pi));
  return mu43;
}

double tripower_quarticity(const TradingDay& day) {
  const int n = day.n();
  if (n < 5)
    throw DataError("tripower_quarticity: need at least 5 returns, day " + to_string(day.date));
  const double mu43 = tripower_moment_constant();
  double s = 0.0;
  for (int k = 4; k < n; ++k) {
    s += std::pow(std::abs(day.returns[k - 4]), 4.0 / 3.0) *
         std::pow(std::abs(day.returns[k - 2]), 4.0 / 3.0) *
         std::pow(std::abs(day.returns[k]), 4.0 / 3.0);
  }
  return static_cast<double>(n) * n / (mu43 * mu43 * mu43 * (n - 4.0)) * s;
}

double jump_z(double rv, double rbv, double rtq, int n) {
  if (rv <= 0.0 || rbv <= 0.0) throw DataError("jump_z: degenerate day, rv or rbv is zero");
  const double c = kMu1SqInv * kMu1SqInv + 2.0 * kMu1SqInv - 5.0;
  double ratio = std::max(1.0, rtq / (rbv * rbv));
  return std::sqrt(static_cast<double>(n)) * (rv - rbv) / rv / std::sqrt(c * ratio);
}

CjCv split_cj_cv(double rv, double rbv, double z, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("split_cj_cv: alpha must lie in (0, 1)");
  double threshold = normal_quantile(1.0 - alpha);
  CjCv out;
  if (z > threshold) out.cj = std::max(rv - rbv, 0.0);
  out.cv = rv - out.cj;
  return out;
}

Semivariance semivariance(const TradingDay& day) {
  Semivariance out;
  for (double r : day.returns) {
    if (r > 0.0)
      out.rs_pos += r * r;
    else if (r < 0.0)
      out.rs_neg += r * r;
  }
  return out;
}

double day_return_std(const TradingDay& day) {
  if (day.n() < 2) return 0.0;
  return std::sqrt(variance_of(day.returns));
}

namespace {

Decomposition bucket_by_thresholds(const TradingDay& day, double lo, double hi) {
  // Tails are closed, the moderate band open. The negative tail is checked
  // first so a collapsed threshold pair still partitions exactly.
  Decomposition out;
  for (double r : day.returns) {
    if (r <= lo)
      out.neg += r * r;
    else if (r >= hi)
      out.pos += r * r;
    else
      out.mod += r * r;
  }
  return out;
}

}  // namespace

Decomposition rex_decompose(const TradingDay& day, double sigma_t, double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5))
    throw ConfigError("rex_decompose: alpha must lie in (0, 0.5)");
  if (sigma_t < 0.0) throw ConfigError("rex_decompose: sigma_t must be nonnegative");
  double lo = normal_quantile(alpha) * sigma_t;
  double hi = normal_quantile(1.0 - alpha) * sigma_t;
  Decomposition out = bucket_by_thresholds(day, lo, hi);
  out.degenerate = sigma_t == 0.0;
  return out;
}

Decomposition req_decompose(const TradingDay& day, double q_low, double q_high) {
  if (!(q_low > 0.0 && q_low < q_high && q_high < 1.0))
    throw ConfigError("req_decompose: need 0 < q_low < q_high < 1");
  if (day.n() < 2) throw DataError("req_decompose: need at least 2 returns");
  std::vector<double> sorted(day.returns.begin(), day.returns.end());
  std::sort(sorted.begin(), sorted.end());
  double lo = quantile_sorted(sorted, q_low);
  double hi = quantile_sorted(sorted, q_high);
  Decomposition out = bucket_by_thresholds(day, lo, hi);
  out.degenerate = sorted.front() == sorted.back();
  return out;
}

LjungBoxResult ljung_box(std::span<const double> series, int lags) {
  const int n = static_cast<int>(series.size());
  if (lags < 1) throw ConfigError("ljung_box: lags must be >= 1");
  if (n <= lags) throw DataError("ljung_box: series length must exceed lag count");
  std::vector<double> rho = autocorrelations(series, lags);
  double q = 0.0;
  for (int k = 1; k <= lags; ++k) q += rho[k - 1] * rho[k - 1] / (n - k);
  q *= static_cast<double>(n) * (n + 2.0);
  return {q, chi_squared_sf(q, lags)};
}

Describe describe(std::span<const double> series) {
  if (series.size() < 2) throw DataError("describe: need at least 2 observations");
  Describe d;
  const double n = static_cast<double>(series.size());
  d.mean = mean_of(series);
  d.max = *std::max_element(series.begin(), series.end());
  d.min = *std::min_element(series.begin(), series.end());
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : series) {
    double c = x - d.mean;
    m2 += c * c;
    m3 += c * c * c;
    m4 += c * c * c * c;
  }
  d.std_dev = std::sqrt(m2 / (n - 1.0));
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 == 0.0) {
    d.skewness = kNan;
    d.kurtosis = kNan;
  } else {
    d.skewness = m3 / std::pow(m2, 1.5);
    d.kurtosis = m4 / (m2 * m2);  // raw, not excess
  }
  return d;
}

const std::array<const char*, kComponentCount> kComponentNames = {
    "rv",      "rbv",     "rtq",     "z",       "cj",      "cv",      "rs_pos",
    "rs_neg",  "rex_neg", "rex_pos", "rex_mod", "req_neg", "req_pos", "req_mod"};

Component component_from_name(const std::string& name) {
  for (int i = 0; i < kComponentCount; ++i)
    if (name == kComponentNames[static_cast<std::size_t>(i)]) return static_cast<Component>(i);
  throw ConfigError("unknown component name '" + name + "'");
}

namespace {

double component_value(const DailyComponents& row, Component c) {
  switch (c) {
    case Component::Rv: return row.rv;
    case Component::Rbv: return row.rbv;
    case Component::Rtq: return row.rtq;
    case Component::Z: return row.z;
    case Component::Cj: return row.cj;
    case Component::Cv: return row.cv;
    case Component::RsPos: return row.rs_pos;
    case Component::RsNeg: return row.rs_neg;
    case Component::RexNeg: return row.rex_neg;
    case Component::RexPos: return row.rex_pos;
    case Component::RexMod: return row.rex_mod;
    case Component::ReqNeg: return row.req_neg;
    case Component::ReqPos: return row.req_pos;
    case Component::ReqMod: return row.req_mod;
  }
  return 0.0;
}

}  // namespace

std::vector<double> ComponentsPanel::column(Component c) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(component_value(row, c));
  return out;
}

DailyComponents compute_components(const TradingDay& day, const ComponentsConfig& config) {
  DailyComponents row;
  row.date = day.date;
  row.rv = realized_variance(day);
  row.rbv = bipower_variation(day);
  row.rtq = tripower_quarticity(day);

  if (row.rv > 0.0 && row.rbv > 0.0) {
    row.z = jump_z(row.rv, row.rbv, row.rtq, day.n());
    CjCv split = split_cj_cv(row.rv, row.rbv, row.z, config.jump_alpha);
    row.cj = split.cj;
    row.cv = split.cv;
  } else {
    row.z = kNan;
    row.z_defined = false;
    row.cj = 0.0;
    row.cv = row.rv;
  }

  Semivariance rs = semivariance(day);
  row.rs_pos = rs.rs_pos;
  row.rs_neg = rs.rs_neg;

  Decomposition rex = rex_decompose(day, day_return_std(day), config.rex_alpha);
  row.rex_neg = rex.neg;
  row.rex_pos = rex.pos;
  row.rex_mod = rex.mod;
  row.rex_degenerate = rex.degenerate;

  Decomposition req = req_decompose(day, config.req_low, config.req_high);
  row.req_neg = req.neg;
  row.req_pos = req.pos;
  row.req_mod = req.mod;
  row.req_degenerate = req.degenerate;
  return row;
}

ComponentsPanel components_panel(const Panel& panel, const ComponentsConfig& config,
                                 int threads) {
  ComponentsPanel out;
  out.dates = panel.calendar;
  out.rows.resize(panel.size());
  parallel_for(panel.size(), threads, [&](std::size_t i) {
    out.rows[i] = compute_components(panel.days[i], config);
  });
  return out;
}

void write_components_csv(std::ostream& out, const ComponentsPanel& panel) {
  out << "date";
  for (const char* name : kComponentNames) out << ',' << name;
  out << '\n';
  for (const auto& row : panel.rows) {
    out << to_string(row.date);
    for (int c = 0; c < kComponentCount; ++c)
      out << ',' << format_double(component_value(row, static_cast<Component>(c)));
    out << '\n';
  }
}

ComponentsPanel read_components_csv(std::istream& in) {
  CsvReader reader(in);
  int date_col = reader.column("date");
  if (date_col < 0) throw ConfigError("components CSV lacks 'date' column");
  std::array<int, kComponentCount> cols{};
  for (int c = 0; c < kComponentCount; ++c) {
    cols[static_cast<std::size_t>(c)] = reader.column(kComponentNames[static_cast<std::size_t>(c)]);
    if (cols[static_cast<std::size_t>(c)] < 0)
      throw ConfigError(std::string("components CSV lacks column '") +
                        kComponentNames[static_cast<std::size_t>(c)] + "'");
  }
  ComponentsPanel panel;
  std::vector<std::string> row;
  int needed = date_col;
  for (int c : cols) needed = std::max(needed, c);
  ++needed;
  while (reader.next(row)) {
    if (static_cast<int>(row.size()) < needed)
      throw DataError("components CSV: short row at line " + std::to_string(reader.line()));
    DailyComponents r;
    r.date = parse_date(row[static_cast<std::size_t>(date_col)]);
    double* fields[kComponentCount] = {&r.rv,      &r.rbv,     &r.rtq,     &r.z,
                                       &r.cj,      &r.cv,      &r.rs_pos,  &r.rs_neg,
                                       &r.rex_neg, &r.rex_pos, &r.rex_mod, &r.req_neg,
                                       &r.req_pos, &r.req_mod};
    for (int c = 0; c < kComponentCount; ++c)
      *fields[c] = std::strtod(row[static_cast<std::size_t>(cols[static_cast<std::size_t>(c)])].c_str(), nullptr);
    r.z_defined = std::isfinite(r.z);
    panel.dates.push_back(r.date);
    panel.rows.push_back(r);
  }
  if (panel.rows.empty()) throw DataError("components CSV has no rows");
  return panel;
}

}  // namespace volpath
