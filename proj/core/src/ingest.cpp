#include "volpath/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "volpath/csv.hpp"

namespace volpath {

namespace {

bool parse_price(const std::string& cell, double& out) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

// Accepts "YYYY-MM-DD HH:MM[:SS[.frac]]" with ' ' or 'T' as the separator;
// a trailing zone designator is ignored.
bool parse_timestamp(const std::string& cell, Date& date, int& second_of_day) {
  int y = 0;
  unsigned mo = 0, dd = 0;
  int hh = 0, mi = 0, ss = 0;
  char sep = 0;
  int consumed = 0;
  int got = std::sscanf(cell.c_str(), "%4d-%2u-%2u%c%2d:%2d%n", &y, &mo, &dd,
                        &sep, &hh, &mi, &consumed);
  if (got < 6 || (sep != ' ' && sep != 'T')) return false;
  if (cell[consumed] == ':') {
    if (std::sscanf(cell.c_str() + consumed + 1, "%2d", &ss) != 1) return false;
  }
  Date d{std::chrono::year{y}, std::chrono::month{mo}, std::chrono::day{dd}};
  if (!d.ok() || hh < 0 || hh > 23 || mi < 0 || mi > 59 || ss < 0 || ss > 60)
    return false;
  date = d;
  second_of_day = hh * 3600 + mi * 60 + ss;
  return true;
}

void report(std::vector<DropRecord>* drops, DropRecord record) {
  if (drops) drops->push_back(std::move(record));
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out += c;
    }
  }
  return out;
}

}  // namespace

std::vector<double> Panel::closes() const {
  std::vector<double> out;
  out.reserve(days.size());
  for (const auto& d : days) out.push_back(d.close());
  return out;
}

std::vector<BarRecord> parse_bars(std::istream& source, const BarColumns& columns,
                                  std::vector<DropRecord>* drops) {
  CsvReader reader(source);
  int ts_col = reader.column(columns.timestamp);
  int px_col = reader.column(columns.price);
  if (ts_col < 0)
    throw ConfigError("bar CSV header lacks timestamp column '" + columns.timestamp + "'");
  if (px_col < 0)
    throw ConfigError("bar CSV header lacks price column '" + columns.price + "'");

  std::vector<BarRecord> bars;
  std::vector<std::string> row;
  int needed = std::max(ts_col, px_col) + 1;
  while (reader.next(row)) {
    if (static_cast<int>(row.size()) < needed) {
      report(drops, {"parse_bars", reader.line(), "", "short_row",
                     "expected at least " + std::to_string(needed) + " cells"});
      continue;
    }
    BarRecord bar;
    if (!parse_timestamp(row[static_cast<std::size_t>(ts_col)], bar.date, bar.second_of_day)) {
      report(drops, {"parse_bars", reader.line(), "", "bad_timestamp",
                     row[static_cast<std::size_t>(ts_col)]});
      continue;
    }
    if (!parse_price(row[static_cast<std::size_t>(px_col)], bar.price) || bar.price <= 0.0) {
      report(drops, {"parse_bars", reader.line(), "", "bad_price",
                     row[static_cast<std::size_t>(px_col)]});
      continue;
    }
    bars.push_back(bar);
  }
  if (bars.empty() && (!drops || drops->empty()))
    throw DataError("empty input: bar file has no data rows");

  std::stable_sort(bars.begin(), bars.end(), [](const BarRecord& a, const BarRecord& b) {
    if (a.date != b.date) return a.date < b.date;
    return a.second_of_day < b.second_of_day;
  });

  // Strictly increasing timestamps: keep the first of any duplicate.
  std::vector<BarRecord> unique;
  unique.reserve(bars.size());
  for (const auto& bar : bars) {
    if (!unique.empty() && unique.back().date == bar.date &&
        unique.back().second_of_day == bar.second_of_day) {
      report(drops, {"parse_bars", -1, to_string(bar.date), "duplicate_timestamp",
                     "second_of_day=" + std::to_string(bar.second_of_day)});
      continue;
    }
    unique.push_back(bar);
  }
  return unique;
}

int bar_spacing_seconds(int bars_per_day) {
  const int session = 23400;  // 6.5 hours
  if (bars_per_day <= 1) return 300;
  return std::max(1, std::min(300, session / bars_per_day));
}

Panel build_panel(const std::vector<BarRecord>& bars, int min_obs,
                  std::vector<DropRecord>* drops) {
  if (min_obs < 2) throw ConfigError("build_panel: min_obs must be >= 2");
  for (std::size_t k = 1; k < bars.size(); ++k) {
    const auto& prev = bars[k - 1];
    const auto& cur = bars[k];
    if (cur.date < prev.date ||
        (cur.date == prev.date && cur.second_of_day <= prev.second_of_day))
      throw DataError("build_panel: bars not sorted by timestamp at position " +
                      std::to_string(k));
  }
  Panel panel;
  std::size_t i = 0;
  while (i < bars.size()) {
    std::size_t j = i;
    while (j < bars.size() && bars[j].date == bars[i].date) ++j;
    TradingDay day;
    day.date = bars[i].date;
    day.prices.reserve(j - i);
    for (std::size_t k = i; k < j; ++k) day.prices.push_back(bars[k].price);
    day.returns.reserve(day.prices.size() > 0 ? day.prices.size() - 1 : 0);
    for (std::size_t k = 1; k < day.prices.size(); ++k)
      day.returns.push_back(std::log(day.prices[k]) - std::log(day.prices[k - 1]));
    if (day.n() < min_obs) {
      report(drops, {"build_panel", -1, to_string(day.date), "too_few_returns",
                     std::to_string(day.n()) + " < min_obs " + std::to_string(min_obs)});
    } else {
      panel.calendar.push_back(day.date);
      panel.days.push_back(std::move(day));
    }
    i = j;
  }
  if (panel.days.empty()) throw DataError("empty panel: no day met min_obs");
  return panel;
}

std::vector<BarRecord> to_bars(const Panel& panel) {
  std::vector<BarRecord> bars;
  for (const auto& day : panel.days) {
    int second = 9 * 3600 + 30 * 60;
    int spacing = bar_spacing_seconds(static_cast<int>(day.prices.size()));
    for (double price : day.prices) {
      bars.push_back({day.date, second, price});
      second += spacing;
    }
  }
  return bars;
}

std::string drop_report_json(const DropRecord& r) {
  std::string out = "{\"stage\":\"" + json_escape(r.stage) + "\"";
  if (r.line >= 0) out += ",\"line\":" + std::to_string(r.line);
  if (!r.date.empty()) out += ",\"date\":\"" + json_escape(r.date) + "\"";
  out += ",\"reason\":\"" + json_escape(r.reason) + "\"";
  out += ",\"detail\":\"" + json_escape(r.detail) + "\"}";
  return out;
}

}  // namespace volpath
