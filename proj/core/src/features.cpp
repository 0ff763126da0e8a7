#include "volpath/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace volpath {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::vector<double> kernel_weights(const KernelParam& kernel, bool normalize) {
  std::vector<double> w(static_cast<std::size_t>(kernel.cutoff) + 1, 0.0);
  double total = 0.0;
  for (int i = 1; i <= kernel.cutoff; ++i) {
    w[static_cast<std::size_t>(i)] = exp_kernel(kernel.lambda, static_cast<double>(i));
    total += w[static_cast<std::size_t>(i)];
  }
  if (normalize && total > 0.0)
    for (auto& x : w) x /= total;
  return w;
}

int kernel_burn_in(const KernelParam& kernel, const FeatureConfig& config) {
  // Once `cutoff` lags exist the truncated sum equals its full value, so the
  // warm-up never needs to exceed the cutoff.
  return std::max(1, std::min(kernel.cutoff, config.warmup));
}

}  // namespace

double exp_kernel(double lambda, double tau) {
  if (!(lambda > 0.0)) throw ConfigError("exp_kernel: lambda must be positive");
  return lambda * std::exp(-lambda * tau);
}

KernelParam KernelParam::from_lambda(double lambda, double weight_tol, int max_cutoff) {
  if (!(lambda > 0.0)) throw ConfigError("kernel decay lambda must be positive");
  // Smallest L with exp(-lambda L) < weight_tol.
  double L = std::ceil(-std::log(weight_tol) / lambda);
  int cutoff = static_cast<int>(std::clamp(L, 1.0, static_cast<double>(max_cutoff)));
  return {lambda, cutoff};
}

namespace {

// Shared scaffold of the price-path features: kernel-weighted sum over
// available lags of a per-lag return transform.
template <typename TermFn>
FeatureSeries price_feature(std::span<const double> closes, const KernelParam& kernel,
                            const FeatureConfig& config, std::string definition,
                            const TermFn& term) {
  const int n = static_cast<int>(closes.size());
  if (n < 2) throw DataError(definition + ": need at least 2 daily closes");
  for (double p : closes)
    if (!(p > 0.0)) throw DataError(definition + ": closes must be positive");

  const bool cumulative = config.convention == ReturnConvention::Cumulative;
  std::vector<double> w = kernel_weights(kernel, config.normalize_weights);
  FeatureSeries out;
  out.definition = std::move(definition);
  out.first_valid = cumulative ? 1 : 2;
  out.burn_in = std::max(out.first_valid, kernel_burn_in(kernel, config));
  out.values.assign(static_cast<std::size_t>(n), kNan);
  for (int t = out.first_valid; t < n; ++t) {
    double acc = 0.0;
    if (cumulative) {
      int lags = std::min(t, kernel.cutoff);
      for (int i = 1; i <= lags; ++i) {
        double base = closes[static_cast<std::size_t>(t - i)];
        acc += w[static_cast<std::size_t>(i)] *
               term((closes[static_cast<std::size_t>(t)] - base) / base);
      }
    } else {
      int lags = std::min(t - 1, kernel.cutoff);
      for (int i = 1; i <= lags; ++i) {
        double base = closes[static_cast<std::size_t>(t - i - 1)];
        acc += w[static_cast<std::size_t>(i)] *
               term((closes[static_cast<std::size_t>(t - i)] - base) / base);
      }
    }
    out.values[static_cast<std::size_t>(t)] = acc;
  }
  return out;
}

}  // namespace

FeatureSeries trend_feature(std::span<const double> closes, const KernelParam& kernel,
                            const FeatureConfig& config) {
  return price_feature(closes, kernel, config, "R1", [](double r) { return r; });
}

FeatureSeries vol_feature(std::span<const double> closes, const KernelParam& kernel,
                          const FeatureConfig& config) {
  return price_feature(closes, kernel, config, "R2", [](double r) { return r * r; });
}

FeatureSeries pd_transform(std::span<const double> series, const KernelParam& kernel,
                           const FeatureConfig& config, std::string definition) {
  const int n = static_cast<int>(series.size());
  std::vector<double> w = kernel_weights(kernel, config.normalize_weights);
  FeatureSeries out;
  out.definition = std::move(definition);
  out.first_valid = 1;
  out.burn_in = kernel_burn_in(kernel, config);
  out.values.assign(static_cast<std::size_t>(n), kNan);
  for (int t = out.first_valid; t < n; ++t) {
    int lags = std::min(t, kernel.cutoff);
    double acc = 0.0;
    for (int i = 1; i <= lags; ++i)
      acc += w[static_cast<std::size_t>(i)] * series[static_cast<std::size_t>(t - i)];
    out.values[static_cast<std::size_t>(t)] = acc;
  }
  return out;
}

FeatureSeries lag_mean(std::span<const double> series, int h) {
  if (h < 1) throw ConfigError("lag_mean: h must be >= 1");
  FeatureSeries wrapped;
  wrapped.values.assign(series.begin(), series.end());
  return lag_mean(wrapped, h);
}

FeatureSeries lag_mean(const FeatureSeries& series, int h) {
  if (h < 1) throw ConfigError("lag_mean: h must be >= 1");
  const int n = static_cast<int>(series.size());
  FeatureSeries out;
  out.definition = series.definition.empty() ? "mean" + std::to_string(h)
                                             : series.definition + "_mean" + std::to_string(h);
  out.first_valid = series.first_valid + h;
  out.burn_in = series.burn_in + h;
  out.values.assign(static_cast<std::size_t>(n), kNan);
  for (int t = out.first_valid; t < n; ++t) {
    double acc = 0.0;
    for (int j = 1; j <= h; ++j) acc += series.values[static_cast<std::size_t>(t - j)];
    out.values[static_cast<std::size_t>(t)] = acc / h;
  }
  return out;
}

}  // namespace volpath
