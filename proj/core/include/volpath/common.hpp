#pragma once

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>

#define VOLPATH_VERSION "0.1.0"

namespace volpath {

/// Configuration or usage problem: bad flags, malformed headers, unknown
/// model names. CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Runtime data problem: empty inputs, insufficient history, degenerate or
/// singular designs. CLI maps these to exit code 1.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Date = std::chrono::year_month_day;

inline int date_index(Date d) {
  return std::chrono::sys_days{d}.time_since_epoch().count();
}

inline Date date_from_index(int days_since_epoch) {
  return Date{std::chrono::sys_days{std::chrono::days{days_since_epoch}}};
}

inline Date next_weekday(Date d) {
  auto sd = std::chrono::sys_days{d} + std::chrono::days{1};
  std::chrono::weekday wd{sd};
  if (wd == std::chrono::Saturday) sd += std::chrono::days{2};
  if (wd == std::chrono::Sunday) sd += std::chrono::days{1};
  return Date{sd};
}

std::string to_string(Date d);

/// Parses "YYYY-MM-DD". Throws DataError on malformed input.
Date parse_date(const std::string& text);

/// Stable 64-bit content hash (FNV-1a), used for config fingerprints in run
/// manifests. Not cryptographic.
inline std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Shortest-round-trip style formatting for doubles ("%.17g"), so that
/// repeated runs serialize bit-identical values.
std::string format_double(double x);

}  // namespace volpath
