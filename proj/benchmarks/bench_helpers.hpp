#pragma once

#include <cmath>
#include <vector>

#include "volpath/ingest.hpp"
#include "volpath/rng.hpp"

namespace vb {

inline volpath::TradingDay bench_day(int n, std::uint64_t seed = 1) {
  volpath::Philox rng(seed, 0);
  volpath::TradingDay day;
  day.date = volpath::Date{std::chrono::year{2020}, std::chrono::month{1}, std::chrono::day{6}};
  day.prices.push_back(100.0);
  for (int i = 0; i < n; ++i) {
    double r = 0.001 * rng.normal();
    day.returns.push_back(r);
    day.prices.push_back(day.prices.back() * std::exp(r));
  }
  return day;
}

inline std::vector<double> bench_series(int n, std::uint64_t seed = 2) {
  volpath::Philox rng(seed, 0);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& x : out) x = 1e-4 * (1.0 + 0.2 * rng.normal());
  return out;
}

}  // namespace vb
