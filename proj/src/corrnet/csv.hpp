#pragma once

#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace corrnet {

// Plain comma-separated records, no quoting. Fields must not contain ','
// or newlines; writers enforce this, readers split verbatim.

std::vector<std::string> split_csv_line(std::string_view line);

/// Shortest round-trip decimal rendering of a double (std::to_chars).
std::string format_double(double v);

/// Scientific notation with 6 significant digits, for p-values.
std::string format_pvalue(double p);

double parse_double(std::string_view field, const std::string& context);
long parse_long(std::string_view field, const std::string& context);

/// Line-oriented reader that tracks line numbers for error messages and
/// strips trailing '\r'.
class CsvReader {
 public:
  explicit CsvReader(const std::string& path);

  /// Next non-empty line split into fields; false at EOF.
  bool next_row(std::vector<std::string>& fields);

  size_t line_number() const { return line_number_; }
  const std::string& path() const { return path_; }

 private:
  std::ifstream in_;
  std::string path_;
  size_t line_number_ = 0;
};

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  void write_raw_line(std::string_view line);
  void write_row(const std::vector<std::string>& fields);
  void close();

 private:
  std::ofstream out_;
  std::string path_;
};

}  // namespace corrnet
