#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "genet/error.hpp"

namespace genet {

/// Flat "key = value" configuration. Blank lines and '#' comments are
/// ignored; a repeated key keeps its last value.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::istream& in, const std::string& source = "<stream>") {
    KeyValueConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string text = trim(line);
      if (text.empty()) continue;
      const auto eq = text.find('=');
      if (eq == std::string::npos)
        throw ValidationError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
      const std::string key = trim(text.substr(0, eq));
      if (key.empty())
        throw ValidationError(source + ":" + std::to_string(line_no) + ": empty key");
      cfg.values_[key] = trim(text.substr(eq + 1));
    }
    return cfg;
  }

  static KeyValueConfig read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    return parse(in, path);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get(const std::string& key, const std::string& fallback = "") const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::string require(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ValidationError("config: missing required key '" + key + "'");
    return it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    return has(key) ? to_double(key, get(key)) : fallback;
  }

  long long get_int(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    const double v = to_double(key, get(key));
    if (v != std::floor(v)) throw ValidationError("config: '" + key + "' must be an integer");
    return static_cast<long long>(v);
  }

  const std::map<std::string, std::string>& values() const { return values_; }

  /// Keys not in `known`, so callers can reject typos.
  std::vector<std::string> unknown_keys(const std::set<std::string>& known,
                                        const std::vector<std::string>& prefixes = {}) const {
    std::vector<std::string> out;
    for (const auto& [key, value] : values_) {
      if (known.count(key)) continue;
      bool matched = false;
      for (const auto& prefix : prefixes) matched = matched || key.rfind(prefix, 0) == 0;
      if (!matched) out.push_back(key);
    }
    return out;
  }

  static std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
  }

  static std::vector<std::string> split_list(const std::string& s, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

 private:
  static double to_double(const std::string& key, const std::string& text) {
    try {
      std::size_t used = 0;
      const double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    } catch (const std::exception&) {
      throw ValidationError("config: '" + key + "' is not a number: '" + text + "'");
    }
  }

  std::map<std::string, std::string> values_;
};

}  // namespace genet
