#include "volpath/synth.hpp"

#include <cmath>
#include <ostream>

#include "volpath/rng.hpp"
#include "volpath/threads.hpp"

namespace volpath {

namespace {
constexpr double kTradingDaysPerYear = 252.0;
constexpr double kRvGuard = 1.0;  // daily variance overflow guard
const Date kSimStart{std::chrono::year{2010}, std::chrono::month{1}, std::chrono::day{4}};
}  // namespace

void SimConfig::validate() const {
  if (n_days < 1) throw ConfigError("simulate: n_days must be >= 1");
  if (n_intraday < 5) throw ConfigError("simulate: n_intraday must be >= 5");
  if (n_intraday > 23399) throw ConfigError("simulate: n_intraday exceeds one-second bars");
  if (!(vol.level > 0.0)) throw ConfigError("simulate: vol level must be positive");
  if (vol.kind == VolProcess::Kind::TwoState && !(vol.level_high > 0.0))
    throw ConfigError("simulate: second vol level must be positive");
  if (jump_intensity < 0.0) throw ConfigError("simulate: jump intensity must be >= 0");
  if (jump_size_std < 0.0) throw ConfigError("simulate: jump size std must be >= 0");
}

std::vector<Date> weekday_calendar(Date start, int n_days) {
  std::vector<Date> out;
  out.reserve(static_cast<std::size_t>(n_days));
  Date d = start;
  std::chrono::weekday wd{std::chrono::sys_days{d}};
  if (wd == std::chrono::Saturday || wd == std::chrono::Sunday) d = next_weekday(d);
  for (int i = 0; i < n_days; ++i) {
    out.push_back(d);
    d = next_weekday(d);
  }
  return out;
}

std::pair<Panel, SimTruth> simulate_jump_diffusion(const SimConfig& config, int threads) {
  config.validate();
  const int D = config.n_days;
  const int n = config.n_intraday;
  const double dt = 1.0 / n;
  const double mu_d = config.mu / kTradingDaysPerYear;

  // Daily regime path first (serial stream 0), then day increments on
  // per-day streams.
  std::vector<double> day_var(static_cast<std::size_t>(D));
  {
    Philox regime_rng(config.seed, 0);
    bool high = false;
    for (int d = 0; d < D; ++d) {
      double level = config.vol.level;
      if (config.vol.kind == VolProcess::Kind::TwoState) {
        if (regime_rng.uniform01() < config.vol.switch_prob) high = !high;
        level = high ? config.vol.level_high : config.vol.level;
      }
      day_var[static_cast<std::size_t>(d)] = level * level / kTradingDaysPerYear;
    }
  }

  std::vector<std::vector<double>> increments(static_cast<std::size_t>(D));
  SimTruth truth;
  truth.iv = day_var;
  truth.jump_var.assign(static_cast<std::size_t>(D), 0.0);

  parallel_for(static_cast<std::size_t>(D), threads, [&](std::size_t d) {
    Philox rng(config.seed, d + 1);
    const double var = day_var[d];
    const double sigma_step = std::sqrt(var * dt);
    const double drift_step = (mu_d - 0.5 * var) * dt;
    auto& incr = increments[d];
    incr.resize(static_cast<std::size_t>(n));
    double jump_var = 0.0;
    for (int i = 0; i < n; ++i) {
      double x = drift_step + sigma_step * rng.normal();
      int jumps = config.jump_intensity > 0.0 ? rng.poisson(config.jump_intensity * dt) : 0;
      for (int j = 0; j < jumps; ++j) {
        double kappa = config.jump_size_std * rng.normal();
        x += kappa;
        jump_var += kappa * kappa;
      }
      incr[static_cast<std::size_t>(i)] = x;
    }
    truth.jump_var[d] = jump_var;
  });

  // Chain prices across days: each day opens at the previous close.
  std::vector<Date> dates = weekday_calendar(kSimStart, D);
  std::vector<BarRecord> bars;
  bars.reserve(static_cast<std::size_t>(D) * (static_cast<std::size_t>(n) + 1));
  double log_price = std::log(100.0);
  const int spacing = bar_spacing_seconds(n + 1);
  for (int d = 0; d < D; ++d) {
    int second = 9 * 3600 + 30 * 60;
    bars.push_back({dates[static_cast<std::size_t>(d)], second, std::exp(log_price)});
    for (int i = 0; i < n; ++i) {
      log_price += increments[static_cast<std::size_t>(d)][static_cast<std::size_t>(i)];
      second += spacing;
      bars.push_back({dates[static_cast<std::size_t>(d)], second, std::exp(log_price)});
    }
  }
  Panel panel = build_panel(bars, 2);
  return {std::move(panel), std::move(truth)};
}

PdvSim simulate_pdv_panel(const PdvParams& params, double noise_std, int n_days,
                          std::uint64_t seed, const FeatureConfig& config) {
  if (params.beta2 < 0.0) throw ConfigError("simulate_pdv_panel: beta2 must be >= 0");
  if (noise_std < 0.0) throw ConfigError("simulate_pdv_panel: noise_std must be >= 0");
  if (n_days < 10) throw ConfigError("simulate_pdv_panel: n_days too small");

  KernelParam k1 = KernelParam::from_lambda(params.lambda1, 1e-10, config.max_cutoff);
  KernelParam k2 = KernelParam::from_lambda(params.lambda2, 1e-10, config.max_cutoff);

  const int N = n_days;
  PdvSim sim;
  sim.dates = weekday_calendar(kSimStart, N);
  sim.closes.resize(static_cast<std::size_t>(N));
  sim.rv.assign(static_cast<std::size_t>(N), 0.0);

  const double base_var = std::max(params.beta0, 1e-8);
  Philox rng(seed, 0);
  sim.closes[0] = 100.0;

  // Warm start: until features are defined, returns are drawn at the base
  // variance; afterwards the conditional variance follows the lagged
  // feature recursion.
  auto truncated_r1 = [&](int t) {
    int lags = std::min(t, k1.cutoff);
    double acc = 0.0;
    for (int i = 1; i <= lags; ++i)
      acc += exp_kernel(params.lambda1, i) *
             (sim.closes[static_cast<std::size_t>(t)] - sim.closes[static_cast<std::size_t>(t - i)]) /
             sim.closes[static_cast<std::size_t>(t - i)];
    return acc;
  };
  auto truncated_r2 = [&](int t) {
    int lags = std::min(t, k2.cutoff);
    double acc = 0.0;
    for (int i = 1; i <= lags; ++i) {
      double r = (sim.closes[static_cast<std::size_t>(t)] - sim.closes[static_cast<std::size_t>(t - i)]) /
                 sim.closes[static_cast<std::size_t>(t - i)];
      acc += exp_kernel(params.lambda2, i) * r * r;
    }
    return acc;
  };

  int warm = std::max(std::min(k1.cutoff, config.warmup), std::min(k2.cutoff, config.warmup));
  double cond_var = base_var;
  for (int t = 1; t < N; ++t) {
    double ret = std::sqrt(cond_var) * rng.normal();
    sim.closes[static_cast<std::size_t>(t)] =
        sim.closes[static_cast<std::size_t>(t - 1)] * std::exp(ret);
    if (t >= warm) {
      double next = params.beta0 + params.beta1 * truncated_r1(t) + params.beta2 * truncated_r2(t);
      cond_var = std::max(next, 1e-10);
      if (!(cond_var < kRvGuard))
        throw DataError("simulate_pdv_panel: divergence, conditional variance exceeded guard");
    }
  }

  // Record features exactly as a fit at the true lambdas would rebuild them,
  // and the rv series the regression implies.
  FeatureSeries r1 = trend_feature(sim.closes, k1, config);
  FeatureSeries r2 = vol_feature(sim.closes, k2, config);
  sim.r1 = r1.values;
  sim.r2 = r2.values;
  sim.first_usable = std::max(r1.burn_in, r2.burn_in);
  const int defined_from = std::max(r1.first_valid, r2.first_valid);
  for (int t = 0; t < N; ++t) {
    if (t < defined_from) {
      sim.rv[static_cast<std::size_t>(t)] = base_var;
      continue;
    }
    double eps = noise_std > 0.0 ? noise_std * rng.normal() : 0.0;
    double rv = params.beta0 + params.beta1 * sim.r1[static_cast<std::size_t>(t)] +
                params.beta2 * sim.r2[static_cast<std::size_t>(t)] + eps;
    if (!(rv < kRvGuard))
      throw DataError("simulate_pdv_panel: divergence, rv exceeded guard");
    sim.rv[static_cast<std::size_t>(t)] = rv;
  }
  return sim;
}

void write_truth_csv(std::ostream& out, const std::vector<Date>& dates, const SimTruth& truth) {
  out << "date,iv,jump_var\n";
  for (std::size_t i = 0; i < dates.size(); ++i) {
    out << to_string(dates[i]) << ',' << format_double(truth.iv[i]) << ','
        << format_double(truth.jump_var[i]) << '\n';
  }
}

}  // namespace volpath
