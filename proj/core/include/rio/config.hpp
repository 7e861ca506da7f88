#pragma once

#include <map>
#include <string>
#include <vector>

#include "rio/types.hpp"

namespace rio {

/// Flat `key = value` text configuration ('#' starts a comment). Values are
/// plain scalars, strings, or comma-separated lists.
class Config {
 public:
  Config() = default;

  /// Throws std::runtime_error naming file and line on malformed input.
  static Config load(const std::string& path);
  static Config parse(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  Vec3 get_vec3(const std::string& key, const Vec3& fallback) const;
  std::vector<double> get_list(const std::string& key) const;  // empty if absent

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  /// Keys sharing a prefix, in sorted order.
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

  std::string serialize() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace rio
