#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "test_helpers.hpp"
#include "volpath/estimators.hpp"
#include "volpath/stats.hpp"

using namespace volpath;
using vt::day_from_returns;

namespace {

bool close_rel(double a, double b, double tol = 1e-12) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

TradingDay gaussian_day(std::uint64_t seed, int n, double sd) {
  return day_from_returns(vt::gaussian_series(seed, n, sd));
}

}  // namespace

TEST_CASE("realized variance matches the defining sum") {
  CHECK(close_rel(realized_variance(day_from_returns({0.01, -0.02})), 5.0e-4));
  CHECK(realized_variance(day_from_returns({0.0, 0.0, 0.0})) == 0.0);
  CHECK(close_rel(realized_variance(day_from_returns({0.013})), 0.013 * 0.013));
  TradingDay empty;
  empty.prices = {100.0};
  CHECK_THROWS_AS(realized_variance(empty), DataError);
}

TEST_CASE("bipower variation hand values") {
  // (3/2) (pi/2) (2 * 1e-4)
  double expected = 1.5 * (std::numbers::pi / 2.0) * 2e-4;
  CHECK(close_rel(bipower_variation(day_from_returns({0.01, 0.01, 0.01})), expected));
  CHECK(bipower_variation(day_from_returns({0.0, 0.0})) == 0.0);
  CHECK_THROWS_AS(bipower_variation(day_from_returns({0.01})), DataError);
}

TEST_CASE("tripower quarticity constant and closed forms") {
  // Frozen from an independent high-precision evaluation of
  // 2^(2/3) Gamma(1/6) / (6 sqrt(pi)).
  CHECK(close_rel(tripower_moment_constant(), 0.830860925029559083));

  CHECK(tripower_quarticity(day_from_returns(std::vector<double>(10, 0.0))) == 0.0);

  const int n = 12;
  const double c = 0.004;
  double mu = tripower_moment_constant();
  double expected = n * static_cast<double>(n) * c * c * c * c / (mu * mu * mu);
  CHECK(close_rel(tripower_quarticity(day_from_returns(std::vector<double>(n, c))), expected));

  CHECK_THROWS_AS(tripower_quarticity(day_from_returns({0.01, 0.01, 0.01, 0.01})), DataError);
}

TEST_CASE("jump statistic hand values") {
  CHECK(jump_z(2e-4, 2e-4, 1e-9, 78) == 0.0);
  // rv = 2 rbv, rtq <= rbv^2, n = 100 -> 10 * 0.5 / sqrt(pi^2/4 + pi - 5).
  CHECK(close_rel(jump_z(2e-4, 1e-4, 5e-9, 100), 6.40713072740159243));
  CHECK_THROWS_AS(jump_z(0.0, 1e-4, 1e-9, 78), DataError);
  CHECK_THROWS_AS(jump_z(1e-4, 0.0, 1e-9, 78), DataError);
}

TEST_CASE("cj/cv split with truncation") {
  double threshold = normal_quantile(0.95);
  CjCv off = split_cj_cv(3e-4, 2e-4, threshold - 0.1, 0.05);
  CHECK(off.cj == 0.0);
  CHECK(off.cv == 3e-4);

  CjCv on = split_cj_cv(3e-4, 2e-4, threshold + 0.1, 0.05);
  CHECK(close_rel(on.cj, 1e-4));
  CHECK(close_rel(on.cv, 2e-4));

  // rv < rbv: jump part truncates to zero and the identity still holds.
  CjCv trunc = split_cj_cv(2e-4, 3e-4, threshold + 5.0, 0.05);
  CHECK(trunc.cj == 0.0);
  CHECK(trunc.cv == 2e-4);
}

TEST_CASE("semivariance splits signed squared returns") {
  Semivariance rs = semivariance(day_from_returns({0.01, -0.02}));
  CHECK(close_rel(rs.rs_pos, 1e-4));
  CHECK(close_rel(rs.rs_neg, 4e-4));

  Semivariance sym = semivariance(day_from_returns({0.015, -0.015}));
  CHECK(sym.rs_pos == sym.rs_neg);

  Semivariance zero = semivariance(day_from_returns({0.0, 0.0}));
  CHECK(zero.rs_pos == 0.0);
  CHECK(zero.rs_neg == 0.0);
}

TEST_CASE("semivariance plus zero mass equals rv exactly") {
  Philox rng(21, 0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> returns(40);
    for (auto& r : returns) {
      double u = rng.uniform01();
      r = u < 0.2 ? 0.0 : 0.01 * rng.normal();
    }
    TradingDay day = day_from_returns(returns);
    Semivariance rs = semivariance(day);
    double zero_mass = 0.0;  // squared zero returns, identically 0
    double rv = realized_variance(day);
    CHECK(close_rel(rs.rs_pos + rs.rs_neg + zero_mass, rv));
    CHECK(rs.rs_pos + rs.rs_neg <= rv * (1.0 + 1e-15));
  }
}

TEST_CASE("rex decomposition threshold behavior") {
  TradingDay day = day_from_returns({0.001, -0.001, 0.0005});
  // Huge sigma: every return is moderate.
  Decomposition all_mod = rex_decompose(day, 1.0, 0.05);
  CHECK(all_mod.neg == 0.0);
  CHECK(all_mod.pos == 0.0);
  CHECK(close_rel(all_mod.mod, realized_variance(day)));

  // A return exactly at the positive threshold counts as extreme.
  double sigma = 0.01;
  double hi = normal_quantile(0.95) * sigma;
  TradingDay boundary = day_from_returns({hi, 0.0});
  Decomposition d = rex_decompose(boundary, sigma, 0.05);
  CHECK(close_rel(d.pos, hi * hi));
  CHECK(d.mod == 0.0);

  // sigma == 0 collapses both thresholds: flagged degenerate.
  Decomposition degen = rex_decompose(day, 0.0, 0.05);
  CHECK(degen.degenerate);
  CHECK(close_rel(degen.neg + degen.pos + degen.mod, realized_variance(day)));

  CHECK_THROWS_AS(rex_decompose(day, 0.01, 0.7), ConfigError);
}

TEST_CASE("rex tail share on a simulated Gaussian day") {
  TradingDay day = gaussian_day(22, 1000, 0.01);
  double sigma = day_return_std(day);
  Decomposition d = rex_decompose(day, sigma, 0.05);
  double rv = realized_variance(day);

  // Brute-force oracle: bucket the same returns independently.
  double lo = normal_quantile(0.05) * sigma;
  double hi = normal_quantile(0.95) * sigma;
  double oracle_pos = 0.0, oracle_neg = 0.0, oracle_mod = 0.0;
  for (double r : day.returns) {
    if (r <= lo)
      oracle_neg += r * r;
    else if (r >= hi)
      oracle_pos += r * r;
    else
      oracle_mod += r * r;
  }
  CHECK(d.pos == oracle_pos);
  CHECK(d.neg == oracle_neg);
  CHECK(d.mod == oracle_mod);

  // Expected extreme-tail variance share of a 5% Gaussian tail is about
  // 0.22; a 1000-draw day stays well inside this band.
  CHECK(d.pos / rv > 0.13);
  CHECK(d.pos / rv < 0.32);
}

TEST_CASE("req decomposition against a sort-based oracle") {
  TradingDay day = gaussian_day(23, 100, 0.01);
  Decomposition d = req_decompose(day, 0.05, 0.95);

  std::vector<double> sorted = day.returns;
  std::sort(sorted.begin(), sorted.end());
  auto type7 = [&](double q) {
    double h = q * (static_cast<double>(sorted.size()) - 1.0);
    std::size_t j = static_cast<std::size_t>(h);
    return sorted[j] + (h - static_cast<double>(j)) * (sorted[j + 1] - sorted[j]);
  };
  double lo = type7(0.05), hi = type7(0.95);
  double oracle_neg = 0.0, oracle_pos = 0.0;
  for (double r : day.returns) {
    if (r <= lo) oracle_neg += r * r;
    else if (r >= hi) oracle_pos += r * r;
  }
  CHECK(close_rel(d.neg, oracle_neg));
  CHECK(close_rel(d.pos, oracle_pos));
  CHECK(close_rel(d.neg + d.pos + d.mod, realized_variance(day)));
}

TEST_CASE("req handles zero and degenerate days") {
  Decomposition zero = req_decompose(day_from_returns({0.0, 0.0, 0.0}), 0.05, 0.95);
  CHECK(zero.neg == 0.0);
  CHECK(zero.pos == 0.0);
  CHECK(zero.mod == 0.0);
  CHECK(zero.degenerate);

  Decomposition flat = req_decompose(day_from_returns({0.01, 0.01, 0.01}), 0.05, 0.95);
  CHECK(flat.degenerate);
  CHECK(flat.mod == 0.0);
  CHECK(close_rel(flat.neg + flat.pos, 3 * 1e-4));

  CHECK_THROWS_AS(req_decompose(day_from_returns({0.01, 0.02}), 0.95, 0.05), ConfigError);
}

TEST_CASE("req reflection symmetry") {
  TradingDay day = gaussian_day(24, 80, 0.01);
  std::vector<double> reflected = day.returns;
  for (auto& r : reflected) r = -r;
  Decomposition a = req_decompose(day, 0.05, 0.95);
  Decomposition b = req_decompose(day_from_returns(reflected), 0.05, 0.95);
  CHECK(close_rel(a.neg, b.pos));
  CHECK(close_rel(a.pos, b.neg));
  CHECK(close_rel(a.mod, b.mod));
}

TEST_CASE("scale equivariance of per-day estimators") {
  TradingDay day = gaussian_day(25, 60, 0.008);
  const double c = 3.7;
  std::vector<double> scaled = day.returns;
  for (auto& r : scaled) r *= c;
  TradingDay day_c = day_from_returns(scaled);

  CHECK(close_rel(realized_variance(day_c), c * c * realized_variance(day)));
  CHECK(close_rel(bipower_variation(day_c), c * c * bipower_variation(day)));

  Semivariance rs = semivariance(day), rs_c = semivariance(day_c);
  CHECK(close_rel(rs_c.rs_pos, c * c * rs.rs_pos));
  CHECK(close_rel(rs_c.rs_neg, c * c * rs.rs_neg));

  Decomposition rex = rex_decompose(day, day_return_std(day), 0.05);
  Decomposition rex_c = rex_decompose(day_c, day_return_std(day_c), 0.05);
  CHECK(close_rel(rex_c.pos, c * c * rex.pos));
  CHECK(close_rel(rex_c.neg, c * c * rex.neg));

  Decomposition req = req_decompose(day, 0.05, 0.95);
  Decomposition req_c = req_decompose(day_c, 0.05, 0.95);
  CHECK(close_rel(req_c.pos, c * c * req.pos));
  CHECK(close_rel(req_c.mod, c * c * req.mod));

  double z = jump_z(realized_variance(day), bipower_variation(day), tripower_quarticity(day),
                    day.n());
  double z_c = jump_z(realized_variance(day_c), bipower_variation(day_c),
                      tripower_quarticity(day_c), day_c.n());
  CHECK(close_rel(z, z_c));
}

TEST_CASE("ljung-box statistics") {
  // White noise: p should reject near the nominal 5% rate.
  int rejections = 0;
  const int runs = 400;
  for (int s = 0; s < runs; ++s) {
    std::vector<double> x = vt::gaussian_series(100 + static_cast<std::uint64_t>(s), 300, 1.0);
    LjungBoxResult r = ljung_box(x, 10);
    if (r.p_value < 0.05) ++rejections;
  }
  double rate = static_cast<double>(rejections) / runs;
  CHECK(rate > 0.02);
  CHECK(rate < 0.09);

  // Strong AR(1): overwhelming rejection.
  Philox rng(55, 0);
  std::vector<double> ar(2000);
  ar[0] = rng.normal();
  for (std::size_t t = 1; t < ar.size(); ++t) ar[t] = 0.9 * ar[t - 1] + rng.normal();
  CHECK(ljung_box(ar, 10).p_value < 1e-3);

  // Boundary: length = lags + 1 is legal.
  std::vector<double> tiny = vt::gaussian_series(7, 11, 1.0);
  CHECK(std::isfinite(ljung_box(tiny, 10).statistic));

  std::vector<double> constant(50, 1.0);
  CHECK_THROWS_AS(ljung_box(constant, 10), DataError);
  CHECK_THROWS_AS(ljung_box(ar, 0), ConfigError);
}

TEST_CASE("describe moments") {
  std::vector<double> constant(10, 2.5);
  Describe d = describe(constant);
  CHECK(d.std_dev == 0.0);
  CHECK(std::isnan(d.skewness));
  CHECK(std::isnan(d.kurtosis));

  std::vector<double> pm = {-1.0, 1.0};
  Describe d2 = describe(pm);
  CHECK(d2.mean == 0.0);
  CHECK(d2.skewness == 0.0);
  CHECK(d2.max == 1.0);
  CHECK(d2.min == -1.0);

  std::vector<double> normal = vt::gaussian_series(77, 1000000, 1.0);
  Describe d3 = describe(normal);
  CHECK(std::abs(d3.kurtosis - 3.0) < 0.05);
  CHECK(std::abs(d3.mean) < 0.01);
}

TEST_CASE("compute_components keeps the partition identities") {
  ComponentsConfig config;
  Philox rng(31, 0);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<double> returns(78);
    for (auto& r : returns) r = 0.001 * rng.normal();
    if (rep % 3 == 0) returns[10] += 0.02;  // an occasional jump
    DailyComponents row = compute_components(day_from_returns(returns), config);
    CHECK(close_rel(row.cj + row.cv, row.rv));
    CHECK(close_rel(row.rex_neg + row.rex_pos + row.rex_mod, row.rv));
    CHECK(close_rel(row.req_neg + row.req_pos + row.req_mod, row.rv));
    CHECK(row.rv >= 0.0);
    CHECK(row.rbv >= 0.0);
    CHECK(row.rtq >= 0.0);
    CHECK(row.cj >= 0.0);
  }
}

TEST_CASE("compute_components flags an all-zero day instead of failing") {
  DailyComponents row = compute_components(day_from_returns(std::vector<double>(20, 0.0)), {});
  CHECK_FALSE(row.z_defined);
  CHECK(row.cj == 0.0);
  CHECK(row.cv == 0.0);
  CHECK(row.rex_degenerate);
  CHECK(row.req_degenerate);
}

TEST_CASE("components panel is thread-count invariant and round-trips CSV") {
  Philox rng(32, 0);
  std::vector<BarRecord> bars;
  for (int d = 0; d < 15; ++d) {
    double price = 100.0;
    for (int i = 0; i < 40; ++i) {
      price *= std::exp(0.002 * rng.normal());
      bars.push_back({vt::test_date(d), 34200 + 300 * i, price});
    }
  }
  Panel panel = build_panel(bars, 10);
  ComponentsPanel one = components_panel(panel, {}, 1);
  ComponentsPanel four = components_panel(panel, {}, 4);
  REQUIRE(one.size() == four.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one.rows[i].rv == four.rows[i].rv);
    CHECK(one.rows[i].z == four.rows[i].z);
    CHECK(one.rows[i].req_mod == four.rows[i].req_mod);
  }

  std::ostringstream out;
  write_components_csv(out, one);
  std::istringstream in(out.str());
  ComponentsPanel back = read_components_csv(in);
  REQUIRE(back.size() == one.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(back.rows[i].rv == one.rows[i].rv);          // bitwise via %.17g
    CHECK(back.rows[i].rex_mod == one.rows[i].rex_mod);
    CHECK(back.rows[i].date == one.rows[i].date);
  }
}
