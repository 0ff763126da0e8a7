#pragma once

#include <span>
#include <string>
#include <vector>

#include "volpath/common.hpp"

namespace volpath {

/// Exponential kernel weight, lambda * exp(-lambda * tau).
double exp_kernel(double lambda, double tau);

/// Decay rate plus the finite support it implies. Weights are truncated once
/// the relative weight drops below `weight_tol`, capped at `max_cutoff`
/// trading days; past that point the tail is below double-precision
/// relevance for any series this library touches.
struct KernelParam {
  double lambda = 1.0;
  int cutoff = 1;

  static KernelParam from_lambda(double lambda, double weight_tol = 1e-10,
                                 int max_cutoff = 1000);
};

enum class ReturnConvention {
  Cumulative,  // r~_{t-i} = (S_t - S_{t-i}) / S_{t-i}
  OneDay,      // one-day simple returns weighted by lag
};

struct FeatureConfig {
  ReturnConvention convention = ReturnConvention::Cumulative;
  bool normalize_weights = false;  // renormalize kernel weights to sum to 1
  int max_cutoff = 1000;
  int warmup = 60;  // kernel warm-up cap in trading days
};

/// A daily series aligned to the panel calendar. Entries before first_valid
/// are NaN (fewer than one available lag). burn_in marks the first index
/// with the full kernel warm-up behind it; design construction drops rows
/// before it, while the values themselves are defined from first_valid on.
struct FeatureSeries {
  std::vector<double> values;
  int first_valid = 0;
  int burn_in = 0;
  std::string definition;

  bool defined_at(std::size_t i) const { return static_cast<int>(i) >= first_valid; }
  double operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }
};

/// Trend feature: kernel-weighted sum of past returns of the daily close
/// series, R1_t = sum_i K(i) r~_{t-i}.
FeatureSeries trend_feature(std::span<const double> closes, const KernelParam& kernel,
                            const FeatureConfig& config = {});

/// Volatility feature: same sum with squared returns, R2_t >= 0.
FeatureSeries vol_feature(std::span<const double> closes, const KernelParam& kernel,
                          const FeatureConfig& config = {});

/// Kernel-weighted sum of a series' strictly past values,
/// PDX_t = sum_{i>=1} K(i) X_{t-i}. Applies uniformly to CJ, CV, RS and
/// REX/REQ components.
FeatureSeries pd_transform(std::span<const double> series, const KernelParam& kernel,
                           const FeatureConfig& config = {}, std::string definition = "PD");

/// h-day lag mean: value at t is the average of the series over t-h..t-1.
FeatureSeries lag_mean(const FeatureSeries& series, int h);
FeatureSeries lag_mean(std::span<const double> series, int h);

}  // namespace volpath
