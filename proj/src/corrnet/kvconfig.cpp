#include "corrnet/kvconfig.hpp"

#include <fstream>
#include <sstream>

#include "corrnet/csv.hpp"
#include "corrnet/errors.hpp"

namespace corrnet {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    std::string t = trim(cur);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

namespace {

void parse_stream(std::istream& in, const std::string& name,
                  std::vector<std::pair<std::string, std::string>>& entries) {
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string t = trim(line);
    if (t.empty()) continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ParseError(name + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ParseError(name + ":" + std::to_string(lineno) + ": empty key");
    }
    entries.emplace_back(std::move(key), std::move(value));
  }
}

}  // namespace

KvConfig KvConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  KvConfig cfg;
  cfg.source_ = path;
  parse_stream(in, path, cfg.entries_);
  return cfg;
}

KvConfig KvConfig::from_string(const std::string& text, const std::string& name) {
  std::istringstream in(text);
  KvConfig cfg;
  cfg.source_ = name;
  parse_stream(in, name, cfg.entries_);
  return cfg;
}

bool KvConfig::has(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return true;
  return false;
}

std::optional<std::string> KvConfig::get(const std::string& key) const {
  std::optional<std::string> out;
  for (const auto& [k, v] : entries_)
    if (k == key) out = v;
  return out;
}

std::string KvConfig::get_or(const std::string& key, const std::string& fallback) const {
  auto v = get(key);
  return v ? *v : fallback;
}

std::string KvConfig::require(const std::string& key) const {
  auto v = get(key);
  if (!v) throw ParseError(source_ + ": missing required key '" + key + "'");
  return *v;
}

double KvConfig::get_double(const std::string& key, double fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  return parse_double(*v, source_ + ": key '" + key + "'");
}

long KvConfig::get_long(const std::string& key, long fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  return parse_long(*v, source_ + ": key '" + key + "'");
}

std::vector<std::string> KvConfig::get_all(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_)
    if (k == key) out.push_back(v);
  return out;
}

std::vector<std::pair<std::string, std::string>> KvConfig::with_prefix(
    const std::string& prefix) const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [k, v] : entries_) {
    if (k.size() > prefix.size() && k.compare(0, prefix.size(), prefix) == 0) {
      out.emplace_back(k.substr(prefix.size()), v);
    }
  }
  return out;
}

}  // namespace corrnet
