#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace volpath {

// Distribution helpers (thin wrappers over Boost.Math).
double normal_cdf(double x);
double normal_quantile(double p);
double chi_squared_sf(double x, double dof);  // upper tail P(X > x)

/// Sample autocorrelations rho_1..rho_max_lag. Throws DataError when the
/// series is constant (autocorrelation undefined).
std::vector<double> autocorrelations(std::span<const double> series, int max_lag);

double mean_of(std::span<const double> xs);
double variance_of(std::span<const double> xs);  // unbiased, n-1 denominator

/// Linear-interpolation empirical quantile (the common "type 7" rule) on an
/// already sorted sequence.
double quantile_sorted(std::span<const double> sorted, double p);

}  // namespace volpath
