#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace flowlab {

/// Flat `key = value` settings. Blank lines and text after '#' are ignored.
/// Lists are comma separated.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;
  std::vector<int> get_ints(const std::string& key, std::vector<int> fallback) const;

  /// Throws kInvalidArgument naming the first key not in `known`.
  void require_known(const std::vector<std::string>& known) const;

  nlohmann::json to_json() const;

 private:
  std::map<std::string, std::string> values_;
};

/// "lo,hi,lo,hi,..." -> per-axis bounds.
std::vector<double> parse_doubles(const std::string& text);

}  // namespace flowlab
