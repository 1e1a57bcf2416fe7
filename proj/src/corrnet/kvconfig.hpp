#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace corrnet {

/// Declarative `key = value` config file. `#` starts a comment, blank lines
/// are skipped, repeated keys accumulate in order (used for list-valued keys
/// such as `sector` and `event`).
class KvConfig {
 public:
  static KvConfig load(const std::string& path);
  static KvConfig from_string(const std::string& text, const std::string& name = "<string>");

  bool has(const std::string& key) const;

  /// Last occurrence wins for scalar keys.
  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;

  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;

  /// All occurrences, in file order.
  std::vector<std::string> get_all(const std::string& key) const;

  /// Keys beginning with `prefix`, e.g. "exogenous." -> {name, path} pairs.
  std::vector<std::pair<std::string, std::string>> with_prefix(const std::string& prefix) const;

  const std::string& source() const { return source_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::string source_;
};

std::string trim(const std::string& s);
std::vector<std::string> split_list(const std::string& s, char sep = ',');

}  // namespace corrnet
