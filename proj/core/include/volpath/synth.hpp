#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "volpath/features.hpp"
#include "volpath/ingest.hpp"

namespace volpath {

struct VolProcess {
  enum class Kind { Constant, TwoState };
  Kind kind = Kind::Constant;
  double level = 0.2;       // annualized volatility
  double level_high = 0.4;  // second regime level (TwoState)
  double switch_prob = 0.05;  // per-day regime switch probability
};

struct SimConfig {
  int n_days = 1000;
  int n_intraday = 78;  // five-minute bars in a 6.5h session
  double mu = 0.0;      // annualized drift
  VolProcess vol;
  double jump_intensity = 0.0;  // expected jumps per day
  double jump_size_std = 0.0;   // per-jump log-return standard deviation
  std::uint64_t seed = 1;

  void validate() const;
};

/// Exact per-day ground truth recorded alongside the generated path.
struct SimTruth {
  std::vector<double> iv;        // integrated variance, daily units
  std::vector<double> jump_var;  // sum of squared jump sizes
};

/// Euler-discretized jump diffusion on the intraday grid. Log-price
/// increments are (mu - sigma^2/2) dt + sigma sqrt(dt) xi plus Poisson
/// jumps applied as additive log-return shocks. Day-level generation uses
/// one counter-based stream per day, so output is independent of thread
/// count and fully determined by the seed.
std::pair<Panel, SimTruth> simulate_jump_diffusion(const SimConfig& config, int threads = 1);

struct PdvParams {
  double beta0 = 0.0;
  double beta1 = 0.0;  // trend-feature loading, <= 0 in the base model
  double beta2 = 0.0;  // volatility-feature loading, must be >= 0
  double lambda1 = 1.0;
  double lambda2 = 1.0;
};

/// Daily panel generated under the trend/volatility feature regression.
/// Prices evolve with conditional variance tied to the lagged feature
/// recursion; the recorded rv series satisfies
/// rv_t = beta0 + beta1 R1_t + beta2 R2_t + eps_t exactly on every row at or
/// past first_usable, with R1/R2 the same truncated-kernel values a fit
/// would rebuild. That makes zero-noise parameter recovery an identity.
struct PdvSim {
  std::vector<Date> dates;
  std::vector<double> closes;
  std::vector<double> rv;
  std::vector<double> r1, r2;  // features recorded at generation
  int first_usable = 0;
};

PdvSim simulate_pdv_panel(const PdvParams& params, double noise_std, int n_days,
                          std::uint64_t seed, const FeatureConfig& config = {});

/// Weekday calendar helper shared by the simulators.
std::vector<Date> weekday_calendar(Date start, int n_days);

void write_truth_csv(std::ostream& out, const std::vector<Date>& dates, const SimTruth& truth);

}  // namespace volpath
