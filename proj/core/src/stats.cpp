#include "volpath/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "volpath/common.hpp"

namespace volpath {

double normal_cdf(double x) {
  static const boost::math::normal_distribution<double> norm;
  return boost::math::cdf(norm, x);
}

double normal_quantile(double p) {
  static const boost::math::normal_distribution<double> norm;
  return boost::math::quantile(norm, p);
}

double chi_squared_sf(double x, double dof) {
  boost::math::chi_squared_distribution<double> chi2(dof);
  if (x <= 0.0) return 1.0;
  return boost::math::cdf(boost::math::complement(chi2, x));
}

double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double variance_of(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

std::vector<double> autocorrelations(std::span<const double> series, int max_lag) {
  const std::size_t n = series.size();
  if (n < 2 || max_lag < 1) throw DataError("autocorrelations: need at least 2 points and lag >= 1");
  if (static_cast<std::size_t>(max_lag) >= n)
    throw DataError("autocorrelations: max_lag must be below series length");
  double m = mean_of(series);
  double denom = 0.0;
  for (double x : series) denom += (x - m) * (x - m);
  if (denom == 0.0) throw DataError("autocorrelations: constant series, autocorrelation undefined");
  std::vector<double> rho(static_cast<std::size_t>(max_lag));
  for (int k = 1; k <= max_lag; ++k) {
    double num = 0.0;
    for (std::size_t t = static_cast<std::size_t>(k); t < n; ++t)
      num += (series[t] - m) * (series[t - k] - m);
    rho[static_cast<std::size_t>(k - 1)] = num / denom;
  }
  return rho;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw DataError("quantile of empty sequence");
  if (sorted.size() == 1) return sorted[0];
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  double h = p * static_cast<double>(sorted.size() - 1);
  std::size_t lo = static_cast<std::size_t>(h);
  double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace volpath
