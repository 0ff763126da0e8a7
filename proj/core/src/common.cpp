#include "volpath/common.hpp"

#include <cstdio>
#include <cstdlib>

namespace volpath {

std::string to_string(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(d.year()),
                unsigned(d.month()), unsigned(d.day()));
  return buf;
}

Date parse_date(const std::string& text) {
  int y = 0;
  unsigned m = 0, dd = 0;
  if (std::sscanf(text.c_str(), "%4d-%2u-%2u", &y, &m, &dd) != 3)
    throw DataError("malformed date: '" + text + "'");
  Date d{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{dd}};
  if (!d.ok()) throw DataError("invalid calendar date: '" + text + "'");
  return d;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace volpath
