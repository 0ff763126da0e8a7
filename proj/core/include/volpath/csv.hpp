#pragma once

#include <istream>
#include <string>
#include <vector>

namespace volpath {

/// Minimal CSV reader: header row, comma separation, optional quoting with
/// double-quote escapes. Enough for the flat numeric tables this project
/// reads and writes.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in);

  const std::vector<std::string>& header() const { return header_; }

  /// Index of a named column, or -1 when absent.
  int column(const std::string& name) const;

  /// Reads the next data row into `out`. Returns false at end of input.
  bool next(std::vector<std::string>& out);

  /// 1-based line number of the row last returned by next().
  long line() const { return line_; }

 private:
  std::istream& in_;
  std::vector<std::string> header_;
  long line_ = 1;
};

std::vector<std::string> split_csv_line(const std::string& line);

/// Joins cells with commas, quoting cells that need it.
std::string join_csv(const std::vector<std::string>& cells);

}  // namespace volpath
