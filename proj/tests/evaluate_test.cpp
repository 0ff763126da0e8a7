#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "test_helpers.hpp"
#include "volpath/evaluate.hpp"
#include "volpath/rng.hpp"

using namespace volpath;

namespace {

bool close_rel(double a, double b, double tol = 1e-12) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

std::vector<ForecastRecord> records_from(const std::vector<double>& realized,
                                         const std::vector<double>& predicted) {
  std::vector<ForecastRecord> out;
  for (std::size_t i = 0; i < realized.size(); ++i)
    out.push_back({vt::test_date(static_cast<int>(i)), 1, predicted[i], realized[i]});
  return out;
}

ForecastSet set_from(const std::vector<std::string>& names,
                     const std::vector<std::vector<double>>& predicted,
                     const std::vector<double>& realized) {
  std::vector<std::pair<std::string, std::vector<ForecastRecord>>> by_model;
  for (std::size_t m = 0; m < names.size(); ++m)
    by_model.emplace_back(names[m], records_from(realized, predicted[m]));
  return align_forecasts(by_model);
}

}  // namespace

TEST_CASE("perfect forecasts zero every loss except qlike's floor") {
  std::vector<double> rv = vt::gaussian_series(51, 200, 2e-5, 2e-4);
  for (auto& x : rv) x = std::abs(x) + 1e-5;
  LossResult r = losses(records_from(rv, rv));
  CHECK(r.mean[0] == 0.0);
  CHECK(r.mean[1] == 0.0);
  CHECK(r.mean[2] == 0.0);
  CHECK(r.mean[3] == 0.0);
  double expected = 0.0;
  for (double x : rv) expected += std::log(x) + 1.0;
  expected /= static_cast<double>(rv.size());
  CHECK(close_rel(r.mean[4], expected));
}

TEST_CASE("doubled forecasts give unit relative losses") {
  std::vector<double> rv = vt::gaussian_series(52, 50, 1e-5, 3e-4);
  for (auto& x : rv) x = std::abs(x) + 1e-5;
  std::vector<double> twice = rv;
  for (auto& x : twice) x *= 2.0;
  LossResult r = losses(records_from(rv, twice));
  CHECK(close_rel(r.mean[2], 1.0));  // HMSE = (1 - 2)^2
  CHECK(close_rel(r.mean[3], 1.0));  // HMAE
}

TEST_CASE("single record hand values") {
  LossResult r = losses(records_from({1e-4}, {2e-4}));
  CHECK(close_rel(r.mean[0], 1e-8));
  CHECK(close_rel(r.mean[4], std::log(2e-4) + 0.5));  // frozen: -8.017193191416237
  CHECK(close_rel(r.mean[4], -8.0171931914162374));
}

TEST_CASE("losses reject nonpositive realized values with dates") {
  std::vector<ForecastRecord> bad = records_from({1e-4, 0.0}, {1e-4, 1e-4});
  std::string date = to_string(vt::test_date(1));
  CHECK_THROWS_WITH_AS(losses(bad), doctest::Contains(date.c_str()), DataError);
  CHECK_THROWS_AS(losses(std::vector<ForecastRecord>{}), DataError);
}

TEST_CASE("qlike is minimized by the truthful forecast") {
  std::vector<double> rv = {2e-4, 3e-4, 1e-4};
  LossResult truthful = losses(records_from(rv, rv));
  for (double bump : {0.8, 0.9, 1.1, 1.3}) {
    std::vector<double> off = rv;
    for (auto& x : off) x *= bump;
    LossResult r = losses(records_from(rv, off));
    CHECK(r.mean[4] >= truthful.mean[4]);
  }
}

TEST_CASE("alignment intersects dates and rejects duplicates") {
  std::vector<double> rv = {1e-4, 2e-4, 3e-4};
  auto a = records_from(rv, rv);
  auto b = records_from(rv, rv);
  b.erase(b.begin());  // model b misses the first date
  ForecastSet set = align_forecasts({{"a", a}, {"b", b}});
  CHECK(set.dates.size() == 2);
  CHECK(set.models.size() == 2);

  auto dup = records_from(rv, rv);
  dup.push_back(dup.front());
  CHECK_THROWS_AS(align_forecasts({{"a", dup}}), DataError);

  auto c = records_from(rv, rv);
  for (std::size_t i = 0; i < c.size(); ++i) c[i].target_date = vt::test_date(100 + static_cast<int>(i));
  CHECK_THROWS_AS(align_forecasts({{"a", a}, {"c", c}}), DataError);  // no shared dates
}

TEST_CASE("mcs keeps a single model with p = 1") {
  std::vector<double> rv(40, 2e-4);
  ForecastSet set = set_from({"only"}, {std::vector<double>(40, 3e-4)}, rv);
  McsOptions options;
  options.reps = 200;
  McsResult res = mcs(build_loss_matrix(set), LossKind::Mse, options);
  CHECK(res.p_values == std::vector<double>{1.0});
  CHECK(res.survivors == std::vector<std::string>{"only"});
}

TEST_CASE("identical loss series both survive with p = 1") {
  std::vector<double> rv = vt::gaussian_series(53, 80, 2e-5, 3e-4);
  for (auto& x : rv) x = std::abs(x) + 1e-5;
  std::vector<double> pred = rv;
  for (auto& x : pred) x *= 1.1;
  ForecastSet set = set_from({"a", "b"}, {pred, pred}, rv);
  McsOptions options;
  options.reps = 500;
  for (auto stat : {McsStatistic::RangeTR, McsStatistic::MaxPairwise, McsStatistic::MaxPerModel}) {
    options.statistic = stat;
    McsResult res = mcs(build_loss_matrix(set), LossKind::Qlike, options);
    CHECK(res.p_values[0] == 1.0);
    CHECK(res.p_values[1] == 1.0);
    CHECK(res.survivors.size() == 2);
  }
}

TEST_CASE("mcs keeps the dominating model and eliminates the noisy copies") {
  const int T = 600;
  Philox rng(54, 0);
  std::vector<double> rv(T), best(T);
  for (int t = 0; t < T; ++t) {
    rv[static_cast<std::size_t>(t)] = 2e-4 * (1.0 + 0.3 * std::abs(rng.normal()));
    best[static_cast<std::size_t>(t)] =
        rv[static_cast<std::size_t>(t)] * (1.0 + 0.05 * rng.normal());
  }
  std::vector<std::vector<double>> predicted{best};
  std::vector<std::string> names{"best"};
  for (int m = 1; m < 6; ++m) {
    std::vector<double> worse(T);
    for (int t = 0; t < T; ++t)
      worse[static_cast<std::size_t>(t)] =
          best[static_cast<std::size_t>(t)] *
          (1.0 + 0.1 * m * std::abs(rng.normal()) + 0.05 * m);
    predicted.push_back(worse);
    names.push_back("noisy" + std::to_string(m));
  }
  ForecastSet set = set_from(names, predicted, rv);
  McsOptions options;
  options.reps = 1000;
  options.seed = 99;
  McsResult res = mcs(build_loss_matrix(set), LossKind::Mse, options);
  bool best_survives = false;
  for (const auto& s : res.survivors)
    if (s == "best") best_survives = true;
  CHECK(best_survives);
  // The last eliminated entry (the final survivor slot) is the best model in
  // a clearly separated design.
  CHECK(res.elimination_order.back() == 0);
}

TEST_CASE("mcs survivor sets nest across confidence levels") {
  std::vector<double> rv = vt::gaussian_series(55, 300, 3e-5, 3e-4);
  for (auto& x : rv) x = std::abs(x) + 1e-5;
  Philox rng(56, 0);
  std::vector<std::vector<double>> predicted;
  std::vector<std::string> names;
  for (int m = 0; m < 5; ++m) {
    std::vector<double> p = rv;
    for (auto& x : p) x *= 1.0 + 0.02 * m + 0.05 * rng.normal();
    predicted.push_back(p);
    names.push_back("m" + std::to_string(m));
  }
  ForecastSet set = set_from(names, predicted, rv);
  LossMatrix matrix = build_loss_matrix(set);
  McsOptions options;
  options.reps = 500;
  std::vector<std::vector<std::string>> survivor_sets;
  for (double level : {0.01, 0.1, 0.25}) {
    options.level = level;
    survivor_sets.push_back(mcs(matrix, LossKind::Mse, options).survivors);
  }
  // Higher level keeps fewer (or equal) models, nested inside the lower.
  for (std::size_t i = 1; i < survivor_sets.size(); ++i) {
    for (const auto& name : survivor_sets[i]) {
      bool in_previous = false;
      for (const auto& prev : survivor_sets[i - 1])
        if (prev == name) in_previous = true;
      CHECK(in_previous);
    }
  }
}

TEST_CASE("mcs is bit-reproducible for a fixed seed at any thread count") {
  std::vector<double> rv = vt::gaussian_series(57, 200, 3e-5, 3e-4);
  for (auto& x : rv) x = std::abs(x) + 1e-5;
  Philox rng(58, 0);
  std::vector<std::vector<double>> predicted;
  std::vector<std::string> names;
  for (int m = 0; m < 4; ++m) {
    std::vector<double> p = rv;
    for (auto& x : p) x *= 1.0 + 0.03 * m + 0.04 * rng.normal();
    predicted.push_back(p);
    names.push_back("m" + std::to_string(m));
  }
  LossMatrix matrix = build_loss_matrix(set_from(names, predicted, rv));
  McsOptions options;
  options.reps = 400;
  options.seed = 1234;
  options.threads = 1;
  McsResult one = mcs(matrix, LossKind::Qlike, options);
  options.threads = 4;
  McsResult four = mcs(matrix, LossKind::Qlike, options);
  CHECK(one.p_values == four.p_values);
  CHECK(one.elimination_order == four.elimination_order);
}

TEST_CASE("mcs validates its configuration") {
  std::vector<double> rv(20, 2e-4);
  LossMatrix matrix = build_loss_matrix(set_from({"a"}, {rv}, rv));
  McsOptions options;
  options.reps = 5;
  CHECK_THROWS_AS(mcs(matrix, LossKind::Mse, options), ConfigError);
  options.reps = 200;
  options.block_len = 100;
  CHECK_THROWS_AS(mcs(matrix, LossKind::Mse, options), ConfigError);
}

TEST_CASE("oos r2 identities") {
  std::vector<double> rv = vt::gaussian_series(59, 100, 2e-5, 3e-4);
  for (auto& x : rv) x = std::abs(x) + 1e-5;
  std::vector<double> bench = rv;
  for (auto& x : bench) x *= 1.2;

  // Model with exactly half the benchmark's squared error sum: shrink the
  // benchmark's errors by sqrt(0.5) around the truth.
  std::vector<double> half = rv;
  for (std::size_t i = 0; i < rv.size(); ++i)
    half[i] = rv[i] + (bench[i] - rv[i]) * std::sqrt(0.5);

  ForecastSet set = set_from({"bench", "self", "half"}, {bench, bench, half}, rv);
  OosR2Result res = oos_r2(set, "bench");
  CHECK(res.r2_oos_pct[0] == 0.0);
  CHECK(res.mspe_adj_stat[0] == 0.0);
  CHECK(res.p_one_sided[0] == 0.5);
  CHECK(res.r2_oos_pct[1] == 0.0);
  CHECK(res.p_one_sided[1] == 0.5);
  CHECK(close_rel(res.r2_oos_pct[2], 50.0, 1e-9));

  CHECK_THROWS_AS(oos_r2(set, "absent"), ConfigError);
}

TEST_CASE("oos r2 is invariant to uniform date reordering") {
  std::vector<double> rv = vt::gaussian_series(61, 60, 2e-5, 3e-4);
  for (auto& x : rv) x = std::abs(x) + 1e-5;
  Philox rng(62, 0);
  std::vector<double> bench = rv, model = rv;
  for (auto& x : bench) x *= 1.0 + 0.3 * rng.normal();
  for (auto& x : model) x *= 1.0 + 0.1 * rng.normal();

  auto build = [&](bool reversed) {
    std::vector<std::pair<std::string, std::vector<ForecastRecord>>> by_model;
    for (const auto& [name, pred] :
         std::vector<std::pair<std::string, const std::vector<double>*>>{{"bench", &bench},
                                                                          {"model", &model}}) {
      std::vector<ForecastRecord> recs = records_from(rv, *pred);
      if (reversed) std::reverse(recs.begin(), recs.end());
      by_model.emplace_back(name, recs);
    }
    return oos_r2(align_forecasts(by_model), "bench");
  };
  OosR2Result fwd = build(false);
  OosR2Result rev = build(true);
  CHECK(fwd.r2_oos_pct == rev.r2_oos_pct);
  CHECK(fwd.mspe_adj_stat == rev.mspe_adj_stat);
}

TEST_CASE("mcs p-values are non-decreasing along the elimination order") {
  std::vector<double> rv = vt::gaussian_series(63, 400, 3e-5, 3e-4);
  for (auto& x : rv) x = std::abs(x) + 1e-5;
  Philox rng(64, 0);
  std::vector<std::vector<double>> predicted;
  std::vector<std::string> names;
  for (int m = 0; m < 6; ++m) {
    std::vector<double> p = rv;
    for (auto& x : p) x *= 1.0 + 0.02 * m + 0.08 * rng.normal();
    predicted.push_back(p);
    names.push_back("m" + std::to_string(m));
  }
  LossMatrix matrix = build_loss_matrix(set_from(names, predicted, rv));
  McsOptions options;
  options.reps = 800;
  McsResult res = mcs(matrix, LossKind::Mse, options);
  for (std::size_t i = 1; i < res.elimination_order.size(); ++i) {
    double prev = res.p_values[static_cast<std::size_t>(res.elimination_order[i - 1])];
    double next = res.p_values[static_cast<std::size_t>(res.elimination_order[i])];
    CHECK(next >= prev);
  }
}

TEST_CASE("oos r2 rejects in favor of the true larger model") {
  // Nested pair: benchmark is the restricted truth (mean forecast), model
  // adds a genuinely informative term estimated in-sample.
  int rejections = 0;
  const int seeds = 60;
  for (int s = 0; s < seeds; ++s) {
    Philox rng(600 + static_cast<std::uint64_t>(s), 0);
    const int T = 1000;
    std::vector<double> x(T), rv(T), bench(T), model(T);
    for (int t = 0; t < T; ++t) {
      x[static_cast<std::size_t>(t)] = std::abs(rng.normal());
      rv[static_cast<std::size_t>(t)] =
          2e-4 + 1e-4 * x[static_cast<std::size_t>(t)] + 2e-5 * rng.normal();
      if (rv[static_cast<std::size_t>(t)] <= 0) rv[static_cast<std::size_t>(t)] = 1e-6;
      bench[static_cast<std::size_t>(t)] = 2.8e-4;  // restricted: constant level
      model[static_cast<std::size_t>(t)] = 2e-4 + 1e-4 * x[static_cast<std::size_t>(t)];
    }
    ForecastSet set = set_from({"bench", "model"}, {bench, model}, rv);
    OosR2Result res = oos_r2(set, "bench");
    if (res.p_one_sided[1] < 0.10) ++rejections;
  }
  CHECK(rejections > seeds / 2);  // far above the 10% nominal size
}
