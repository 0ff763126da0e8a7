#include "volpath/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "volpath/rng.hpp"
#include "volpath/stats.hpp"
#include "volpath/threads.hpp"

namespace volpath {

namespace {
const char* kLossNames[kLossKindCount] = {"MSE", "MAE", "HMSE", "HMAE", "QLIKE"};
constexpr double kHuge = 1e308;
}  // namespace

const char* loss_name(LossKind kind) { return kLossNames[static_cast<int>(kind)]; }

LossKind loss_from_name(const std::string& name) {
  for (int i = 0; i < kLossKindCount; ++i)
    if (name == kLossNames[i]) return static_cast<LossKind>(i);
  throw ConfigError("unknown loss kind '" + name + "'");
}

LossResult losses(std::span<const ForecastRecord> records) {
  if (records.empty()) throw DataError("losses: no forecast records");
  std::string bad_dates;
  for (const auto& r : records) {
    if (r.realized <= 0.0 || r.predicted <= 0.0) {
      if (!bad_dates.empty()) bad_dates += ", ";
      bad_dates += to_string(r.target_date);
    }
  }
  if (!bad_dates.empty())
    throw DataError("losses: nonpositive realized or predicted values on " + bad_dates);

  LossResult out;
  for (auto& s : out.series) s.reserve(records.size());
  for (const auto& r : records) {
    double err = r.realized - r.predicted;
    double rel = 1.0 - r.predicted / r.realized;
    out.series[0].push_back(err * err);
    out.series[1].push_back(std::abs(err));
    out.series[2].push_back(rel * rel);
    out.series[3].push_back(std::abs(rel));
    out.series[4].push_back(std::log(r.predicted) + r.realized / r.predicted);
  }
  for (int k = 0; k < kLossKindCount; ++k)
    out.mean[static_cast<std::size_t>(k)] = mean_of(out.series[static_cast<std::size_t>(k)]);
  return out;
}

ForecastSet align_forecasts(
    const std::vector<std::pair<std::string, std::vector<ForecastRecord>>>& by_model) {
  if (by_model.empty()) throw ConfigError("align_forecasts: no models");
  std::map<Date, int> counts;
  std::map<Date, double> realized;
  for (const auto& [name, records] : by_model) {
    std::set<Date> seen;
    for (const auto& r : records) {
      if (!seen.insert(r.target_date).second)
        throw DataError("align_forecasts: duplicate date " + to_string(r.target_date) +
                        " in model " + name);
      ++counts[r.target_date];
      realized[r.target_date] = r.realized;
    }
  }
  ForecastSet set;
  for (const auto& [date, n] : counts)
    if (n == static_cast<int>(by_model.size())) set.dates.push_back(date);
  if (set.dates.empty()) throw DataError("align_forecasts: models share no forecast dates");

  std::map<Date, std::size_t> pos;
  for (std::size_t i = 0; i < set.dates.size(); ++i) pos[set.dates[i]] = i;
  set.realized.resize(set.dates.size());
  for (const auto& d : set.dates) set.realized[pos[d]] = realized[d];
  for (const auto& [name, records] : by_model) {
    set.models.push_back(name);
    std::vector<double> pred(set.dates.size(), 0.0);
    for (const auto& r : records) {
      auto it = pos.find(r.target_date);
      if (it != pos.end()) pred[it->second] = r.predicted;
    }
    set.predicted.push_back(std::move(pred));
  }
  return set;
}

LossMatrix build_loss_matrix(const ForecastSet& set) {
  LossMatrix matrix;
  matrix.models = set.models;
  matrix.dates = set.dates;
  for (std::size_t m = 0; m < set.models.size(); ++m) {
    std::vector<ForecastRecord> records(set.dates.size());
    for (std::size_t t = 0; t < set.dates.size(); ++t)
      records[t] = {set.dates[t], 0, set.predicted[m][t], set.realized[t]};
    LossResult r = losses(records);
    matrix.series.push_back(std::move(r.series));
    matrix.means.push_back(r.mean);
  }
  return matrix;
}

namespace {

double safe_ratio(double num, double sd) {
  if (sd > 0.0) return num / sd;
  if (num == 0.0) return 0.0;
  return num > 0.0 ? kHuge : -kHuge;
}

}  // namespace

McsResult mcs(const LossMatrix& matrix, LossKind kind, const McsOptions& options) {
  const int m = static_cast<int>(matrix.models.size());
  if (m < 1) throw ConfigError("mcs: no models");
  if (options.reps < 100) throw ConfigError("mcs: need at least 100 bootstrap replications");
  const int T = static_cast<int>(matrix.dates.size());
  if (T < 2) throw DataError("mcs: need at least 2 evaluation dates");
  int block = options.block_len > 0
                  ? options.block_len
                  : static_cast<int>(std::ceil(std::cbrt(static_cast<double>(T))));
  if (block < 1 || block > T) throw ConfigError("mcs: block length out of range");

  McsResult result;
  result.statistic = options.statistic;
  result.models = matrix.models;
  result.level = options.level;
  result.reps = options.reps;
  result.block_len = block;
  result.p_values.assign(static_cast<std::size_t>(m), 1.0);

  if (m == 1) {
    result.survivors = matrix.models;
    result.elimination_order = {0};
    return result;
  }

  const auto& losses_of = [&](int u) -> const std::vector<double>& {
    return matrix.series[static_cast<std::size_t>(u)][static_cast<int>(kind)];
  };

  // Per-model full-sample means and per-replication bootstrapped means. One
  // time-index resample is shared by all models within a replication.
  std::vector<double> mean(static_cast<std::size_t>(m));
  for (int u = 0; u < m; ++u) mean[static_cast<std::size_t>(u)] = mean_of(losses_of(u));

  const int B = options.reps;
  std::vector<double> boot(static_cast<std::size_t>(B) * static_cast<std::size_t>(m));
  const int n_blocks = (T + block - 1) / block;
  parallel_for(static_cast<std::size_t>(B), options.threads, [&](std::size_t b) {
    Philox rng(options.seed, b + 1);
    std::vector<int> idx(static_cast<std::size_t>(T));
    int filled = 0;
    for (int blk = 0; blk < n_blocks && filled < T; ++blk) {
      int start = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(T - block + 1)));
      for (int j = 0; j < block && filled < T; ++j) idx[static_cast<std::size_t>(filled++)] = start + j;
    }
    for (int u = 0; u < m; ++u) {
      const auto& series = losses_of(u);
      double acc = 0.0;
      for (int t = 0; t < T; ++t) acc += series[static_cast<std::size_t>(idx[static_cast<std::size_t>(t)])];
      boot[b * static_cast<std::size_t>(m) + static_cast<std::size_t>(u)] = acc / T;
    }
  });

  // Bootstrap variance of each pair differential mean (a pair property, so
  // computed once for the full model set).
  std::vector<double> sd(static_cast<std::size_t>(m) * static_cast<std::size_t>(m), 0.0);
  for (int u = 0; u < m; ++u) {
    for (int v = u + 1; v < m; ++v) {
      double d = mean[static_cast<std::size_t>(u)] - mean[static_cast<std::size_t>(v)];
      double acc = 0.0;
      for (int b = 0; b < B; ++b) {
        double db = boot[static_cast<std::size_t>(b) * m + static_cast<std::size_t>(u)] -
                    boot[static_cast<std::size_t>(b) * m + static_cast<std::size_t>(v)];
        acc += (db - d) * (db - d);
      }
      double s = std::sqrt(acc / B);
      sd[static_cast<std::size_t>(u) * m + static_cast<std::size_t>(v)] = s;
      sd[static_cast<std::size_t>(v) * m + static_cast<std::size_t>(u)] = s;
    }
  }

  auto pair_sd = [&](int u, int v) { return sd[static_cast<std::size_t>(u) * m + static_cast<std::size_t>(v)]; };
  auto pair_mean = [&](int u, int v) {
    return mean[static_cast<std::size_t>(u)] - mean[static_cast<std::size_t>(v)];
  };
  auto pair_boot = [&](int b, int u, int v) {
    return boot[static_cast<std::size_t>(b) * m + static_cast<std::size_t>(u)] -
           boot[static_cast<std::size_t>(b) * m + static_cast<std::size_t>(v)];
  };

  std::vector<int> alive;
  for (int u = 0; u < m; ++u) alive.push_back(u);
  double running_p = 0.0;

  while (alive.size() > 1) {
    double t_obs = 0.0;
    if (options.statistic == McsStatistic::MaxPerModel) {
      // Per-model mean differential against the surviving set.
      std::vector<double> d_dot(alive.size()), sd_dot(alive.size());
      for (std::size_t a = 0; a < alive.size(); ++a) {
        double acc = 0.0;
        for (std::size_t c = 0; c < alive.size(); ++c)
          if (c != a) acc += pair_mean(alive[a], alive[c]);
        d_dot[a] = acc / static_cast<double>(alive.size() - 1);
      }
      std::vector<double> boot_dot(static_cast<std::size_t>(B) * alive.size());
      for (int b = 0; b < B; ++b) {
        for (std::size_t a = 0; a < alive.size(); ++a) {
          double acc = 0.0;
          for (std::size_t c = 0; c < alive.size(); ++c)
            if (c != a) acc += pair_boot(b, alive[a], alive[c]);
          boot_dot[static_cast<std::size_t>(b) * alive.size() + a] =
              acc / static_cast<double>(alive.size() - 1);
        }
      }
      for (std::size_t a = 0; a < alive.size(); ++a) {
        double acc = 0.0;
        for (int b = 0; b < B; ++b) {
          double diff = boot_dot[static_cast<std::size_t>(b) * alive.size() + a] - d_dot[a];
          acc += diff * diff;
        }
        sd_dot[a] = std::sqrt(acc / B);
      }
      for (std::size_t a = 0; a < alive.size(); ++a)
        t_obs = std::max(t_obs, safe_ratio(d_dot[a], sd_dot[a]));

      int exceed = 0;
      for (int b = 0; b < B; ++b) {
        double t_b = -kHuge;
        for (std::size_t a = 0; a < alive.size(); ++a)
          t_b = std::max(t_b, safe_ratio(boot_dot[static_cast<std::size_t>(b) * alive.size() + a] - d_dot[a],
                                         sd_dot[a]));
        if (t_b >= t_obs) ++exceed;
      }
      double p_step = static_cast<double>(exceed) / B;
      running_p = std::max(running_p, p_step);

      std::size_t worst = 0;
      double worst_t = -kHuge;
      for (std::size_t a = 0; a < alive.size(); ++a) {
        double t = safe_ratio(d_dot[a], sd_dot[a]);
        if (t > worst_t) {
          worst_t = t;
          worst = a;
        }
      }
      int eliminated = alive[worst];
      result.p_values[static_cast<std::size_t>(eliminated)] = running_p;
      result.elimination_order.push_back(eliminated);
      alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(worst));
      continue;
    }

    const bool squared = options.statistic == McsStatistic::MaxPairwise;
    for (std::size_t a = 0; a < alive.size(); ++a) {
      for (std::size_t c = a + 1; c < alive.size(); ++c) {
        double t = safe_ratio(std::abs(pair_mean(alive[a], alive[c])), pair_sd(alive[a], alive[c]));
        if (squared) t = t * t;
        t_obs = std::max(t_obs, t);
      }
    }
    int exceed = 0;
    for (int b = 0; b < B; ++b) {
      double t_b = 0.0;
      for (std::size_t a = 0; a < alive.size(); ++a) {
        for (std::size_t c = a + 1; c < alive.size(); ++c) {
          double num = std::abs(pair_boot(b, alive[a], alive[c]) - pair_mean(alive[a], alive[c]));
          double t = safe_ratio(num, pair_sd(alive[a], alive[c]));
          if (squared) t = t * t;
          t_b = std::max(t_b, t);
        }
      }
      if (t_b >= t_obs) ++exceed;
    }
    double p_step = static_cast<double>(exceed) / B;
    running_p = std::max(running_p, p_step);

    // Elimination rule: drop the model with the largest standardized adverse
    // mean differential.
    std::size_t worst = 0;
    double worst_t = -kHuge;
    for (std::size_t a = 0; a < alive.size(); ++a) {
      double t_a = -kHuge;
      for (std::size_t c = 0; c < alive.size(); ++c) {
        if (c == a) continue;
        t_a = std::max(t_a, safe_ratio(pair_mean(alive[a], alive[c]), pair_sd(alive[a], alive[c])));
      }
      if (t_a > worst_t) {
        worst_t = t_a;
        worst = a;
      }
    }
    int eliminated = alive[worst];
    result.p_values[static_cast<std::size_t>(eliminated)] = running_p;
    result.elimination_order.push_back(eliminated);
    alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(worst));
  }

  result.p_values[static_cast<std::size_t>(alive.front())] = 1.0;
  result.elimination_order.push_back(alive.front());
  for (int u = 0; u < m; ++u)
    if (result.p_values[static_cast<std::size_t>(u)] >= options.level)
      result.survivors.push_back(matrix.models[static_cast<std::size_t>(u)]);
  return result;
}

OosR2Result oos_r2(const ForecastSet& set, const std::string& benchmark) {
  auto it = std::find(set.models.begin(), set.models.end(), benchmark);
  if (it == set.models.end())
    throw ConfigError("oos_r2: benchmark model '" + benchmark + "' not present");
  const std::size_t b = static_cast<std::size_t>(it - set.models.begin());
  const std::size_t T = set.dates.size();
  if (T < 2) throw DataError("oos_r2: need at least 2 dates");

  double sse_bench = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    double e = set.realized[t] - set.predicted[b][t];
    sse_bench += e * e;
  }

  OosR2Result out;
  out.benchmark = benchmark;
  out.models = set.models;
  for (std::size_t j = 0; j < set.models.size(); ++j) {
    double sse = 0.0;
    std::vector<double> f(T);
    for (std::size_t t = 0; t < T; ++t) {
      double e0 = set.realized[t] - set.predicted[b][t];
      double ej = set.realized[t] - set.predicted[j][t];
      double adj = set.predicted[b][t] - set.predicted[j][t];
      sse += ej * ej;
      f[t] = e0 * e0 - ej * ej + adj * adj;
    }
    double r2 = sse_bench > 0.0 ? 100.0 * (1.0 - sse / sse_bench) : 0.0;
    double fbar = mean_of(f);
    double fvar = variance_of(f);
    double stat = fvar > 0.0 ? fbar / std::sqrt(fvar / static_cast<double>(T))
                             : (fbar == 0.0 ? 0.0 : (fbar > 0.0 ? kHuge : -kHuge));
    double p = stat >= kHuge ? 0.0 : (stat <= -kHuge ? 1.0 : 1.0 - normal_cdf(stat));
    if (j == b) {
      r2 = 0.0;
      stat = 0.0;
      p = 0.5;
    }
    out.r2_oos_pct.push_back(r2);
    out.mspe_adj_stat.push_back(stat);
    out.p_one_sided.push_back(p);
  }
  return out;
}

}  // namespace volpath
