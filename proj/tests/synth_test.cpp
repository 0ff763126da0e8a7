#include <doctest.h>

#include <cmath>

#include "test_helpers.hpp"
#include "volpath/estimators.hpp"
#include "volpath/models.hpp"
#include "volpath/synth.hpp"

using namespace volpath;

TEST_CASE("no jumps means zero recorded jump variation") {
  SimConfig config;
  config.n_days = 50;
  config.n_intraday = 20;
  config.jump_intensity = 0.0;
  config.seed = 3;
  auto [panel, truth] = simulate_jump_diffusion(config);
  for (double jv : truth.jump_var) CHECK(jv == 0.0);
  CHECK(panel.size() == 50);
}

TEST_CASE("constant volatility records an exact daily integrated variance") {
  SimConfig config;
  config.n_days = 30;
  config.n_intraday = 26;
  config.vol.level = 0.3;
  config.seed = 4;
  auto [panel, truth] = simulate_jump_diffusion(config);
  double expected = 0.3 * 0.3 / 252.0;
  for (double iv : truth.iv) CHECK(iv == expected);
}

TEST_CASE("same seed reproduces the panel bit for bit") {
  SimConfig config;
  config.n_days = 40;
  config.n_intraday = 15;
  config.jump_intensity = 1.0;
  config.jump_size_std = 0.02;
  config.seed = 5;
  auto [a, ta] = simulate_jump_diffusion(config);
  auto [b, tb] = simulate_jump_diffusion(config);
  REQUIRE(a.size() == b.size());
  for (std::size_t d = 0; d < a.size(); ++d) REQUIRE(a.days[d].prices == b.days[d].prices);
  CHECK(ta.jump_var == tb.jump_var);
}

TEST_CASE("thread count does not change the generated path") {
  SimConfig config;
  config.n_days = 60;
  config.n_intraday = 12;
  config.jump_intensity = 0.5;
  config.jump_size_std = 0.015;
  config.vol.kind = VolProcess::Kind::TwoState;
  config.vol.switch_prob = 0.1;
  config.seed = 6;
  auto [a, ta] = simulate_jump_diffusion(config, 1);
  auto [b, tb] = simulate_jump_diffusion(config, 4);
  for (std::size_t d = 0; d < a.size(); ++d) REQUIRE(a.days[d].prices == b.days[d].prices);
  CHECK(ta.iv == tb.iv);
}

TEST_CASE("day returns telescope and jump variation is recoverable") {
  SimConfig config;
  config.n_days = 5000;
  config.n_intraday = 78;
  config.jump_intensity = 1.0;
  // Jumps well above the per-interval diffusion scale: bipower's residual
  // jump sensitivity (each jump leaks into two adjacent products) stays
  // below the 10% recovery bound.
  config.jump_size_std = 0.04;
  config.seed = 7;
  auto [panel, truth] = simulate_jump_diffusion(config, 4);

  for (std::size_t d = 0; d < panel.size(); d += 97) {
    double total = 0.0;
    for (double r : panel.days[d].returns) total += r;
    double expected = std::log(panel.days[d].close() / panel.days[d].open());
    CHECK(std::abs(total - expected) < 1e-12);
  }

  // mean(RV - RBV) estimates mean jump variation within 10% relative.
  double gap = 0.0, jv = 0.0;
  for (std::size_t d = 0; d < panel.size(); ++d) {
    gap += realized_variance(panel.days[d]) - bipower_variation(panel.days[d]);
    jv += truth.jump_var[d];
  }
  gap /= static_cast<double>(panel.size());
  jv /= static_cast<double>(panel.size());
  CHECK(std::abs(gap - jv) / jv < 0.10);
}

TEST_CASE("config validation") {
  SimConfig config;
  config.n_intraday = 3;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config.n_intraday = 20;
  config.vol.level = 0.0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("pdv panel: zero noise makes parameter recovery an identity") {
  PdvParams params{6e-5, -0.003, 0.45, 1.8, 0.9};
  PdvSim sim = simulate_pdv_panel(params, 0.0, 600, 8);
  DesignInputs inputs = design_inputs_from_series(sim.dates, sim.closes, sim.rv);
  DesignMatrix design = build_design(ModelSpec{ModelFamily::PdvBase, {1.8, 0.9}}, inputs);
  FitResult fit = ols_fit(design);
  CHECK(fit.sse < 1e-20);
  CHECK(std::abs(fit.coefficients[0].estimate - params.beta0) < 1e-10);
  CHECK(std::abs(fit.coefficients[1].estimate - params.beta1) < 1e-6);
  CHECK(std::abs(fit.coefficients[2].estimate - params.beta2) < 1e-6);
}

TEST_CASE("pdv panel: zero loadings produce a constant rv series") {
  PdvParams params{7e-5, 0.0, 0.0, 1.0, 1.0};
  PdvSim sim = simulate_pdv_panel(params, 0.0, 200, 9);
  for (int t = sim.first_usable; t < 200; ++t)
    CHECK(sim.rv[static_cast<std::size_t>(t)] == 7e-5);
}

TEST_CASE("pdv panel guards against explosive parameterizations") {
  PdvParams params{1e-4, 0.0, 80.0, 0.05, 0.05};  // strong feedback, slow decay
  CHECK_THROWS_AS(simulate_pdv_panel(params, 0.0, 2000, 10), DataError);
  PdvParams negative{1e-4, 0.0, -1.0, 1.0, 1.0};
  CHECK_THROWS_AS(simulate_pdv_panel(negative, 0.0, 100, 10), ConfigError);
}

TEST_CASE("weekday calendar skips weekends and stays strictly increasing") {
  auto dates = weekday_calendar(vt::test_date(), 30);
  REQUIRE(dates.size() == 30);
  for (std::size_t i = 1; i < dates.size(); ++i) CHECK(dates[i - 1] < dates[i]);
  for (Date d : dates) {
    std::chrono::weekday wd{std::chrono::sys_days{d}};
    CHECK(wd != std::chrono::Saturday);
    CHECK(wd != std::chrono::Sunday);
  }
}
