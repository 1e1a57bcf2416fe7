#include "corrnet/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "corrnet/errors.hpp"

namespace corrnet {

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  size_t pos = 0;
  while (true) {
    size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(pos));
      break;
    }
    fields.emplace_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return fields;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw ComputeError("double formatting failed");
  return std::string(buf, end);
}

std::string format_pvalue(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.5e", p);
  return buf;
}

double parse_double(std::string_view field, const std::string& context) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError("expected a number, got '" + std::string(field) + "' (" + context + ")");
  }
  return v;
}

long parse_long(std::string_view field, const std::string& context) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError("expected an integer, got '" + std::string(field) + "' (" + context + ")");
  }
  return v;
}

CsvReader::CsvReader(const std::string& path) : in_(path), path_(path) {
  if (!in_) throw IoError("cannot open file: " + path);
}

bool CsvReader::next_row(std::vector<std::string>& fields) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_number_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fields = split_csv_line(line);
    return true;
  }
  return false;
}

CsvWriter::CsvWriter(const std::string& path) : out_(path, std::ios::binary), path_(path) {
  if (!out_) throw IoError("cannot open file for writing: " + path);
}

void CsvWriter::write_raw_line(std::string_view line) {
  out_ << line << '\n';
  if (!out_) throw IoError("write failed: " + path_);
}

void CsvWriter::write_row(const std::vector<std::string>& fields) {
  std::string line;
  for (size_t i = 0; i < fields.size(); ++i) {
    const std::string& f = fields[i];
    if (f.find_first_of(",\r\n") != std::string::npos) {
      throw DataError("field contains a separator and cannot be serialized: '" + f + "'");
    }
    if (i) line += ',';
    line += f;
  }
  write_raw_line(line);
}

void CsvWriter::close() {
  out_.close();
  if (!out_) throw IoError("close failed: " + path_);
}

}  // namespace corrnet
