#pragma once

#include <istream>
#include <string>
#include <vector>

#include "volpath/common.hpp"

namespace volpath {

/// One intraday price bar.
struct BarRecord {
  Date date{};
  int second_of_day = 0;  // exchange-local seconds since midnight
  double price = 0.0;
};

/// One trading day: the atom every estimator works on. Bar prices are kept
/// so a panel can be rebuilt from its own bar stream without loss.
struct TradingDay {
  Date date{};
  std::vector<double> prices;   // bar prices, time order
  std::vector<double> returns;  // intraday log returns, returns[i] = log(p[i+1]/p[i])
  int n() const { return static_cast<int>(returns.size()); }
  double open() const { return prices.front(); }
  double close() const { return prices.back(); }
};

struct Panel {
  std::vector<TradingDay> days;
  std::vector<Date> calendar;  // strictly increasing, one entry per day

  std::size_t size() const { return days.size(); }
  std::vector<double> closes() const;
};

/// A row or day that was rejected while building the panel, for the
/// line-delimited JSON drop report.
struct DropRecord {
  std::string stage;   // "parse_bars" | "build_panel"
  long line = -1;      // source line for row drops, -1 otherwise
  std::string date;    // "YYYY-MM-DD" for day drops, empty otherwise
  std::string reason;
  std::string detail;
};

struct BarColumns {
  std::string timestamp = "timestamp";
  std::string price = "price";
};

/// Parses price bars from CSV text. Rows with non-numeric, non-positive or
/// non-finite prices (and rows whose timestamp cannot be parsed) are dropped
/// and reported. Output is sorted by timestamp; exact duplicate timestamps
/// keep the first row.
///
/// Throws ConfigError when a mapped column is missing from the header and
/// DataError when the file has no data rows at all.
std::vector<BarRecord> parse_bars(std::istream& source, const BarColumns& columns,
                                  std::vector<DropRecord>* drops = nullptr);

/// Groups sorted bars into trading days and computes intraday log returns.
/// Days with fewer than `min_obs` returns are dropped and reported. Throws
/// DataError when no day survives or when the input is not sorted.
Panel build_panel(const std::vector<BarRecord>& bars, int min_obs = 10,
                  std::vector<DropRecord>* drops = nullptr);

/// Bar spacing that fits `bars_per_day` bars into a 6.5-hour session
/// starting 09:30 (five minutes at the usual 79-bar grid, denser beyond).
int bar_spacing_seconds(int bars_per_day);

/// Reconstructs the bar stream of a panel (timestamps synthesized on a
/// five-minute grid). build_panel on the result reproduces the panel.
std::vector<BarRecord> to_bars(const Panel& panel);

std::string drop_report_json(const DropRecord& record);

}  // namespace volpath
