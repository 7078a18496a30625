#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dmo/grid.hpp"

namespace dmo {

// Flat key-value configuration.  Lines are `key = value`, `#` starts a
// comment, `[section]` prefixes following keys with `section.`.  Values stay
// strings until a typed getter parses them; every parse failure names the
// offending key.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& key) const { return kv_.count(key) != 0; }
  const std::map<std::string, std::string>& entries() const { return kv_; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  long get_int(const std::string& key) const;
  long get_int(const std::string& key, long fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::vector<double> get_list(const std::string& key) const;
  std::vector<double> get_list(const std::string& key,
                               const std::vector<double>& fallback) const;
  // Comma-separated x:y pairs.
  std::vector<Point> get_points(const std::string& key) const;
  std::vector<Point> get_points(const std::string& key,
                                const std::vector<Point>& fallback) const;

  void set(const std::string& key, const std::string& value);

  // FNV-1a over the sorted canonical `key=value` serialization; stable
  // across runs and independent of file formatting.
  std::uint64_t hash() const;
  std::string hash_hex() const;

  // Complains about any present key not in the allowed set.
  void restrict_keys(const std::vector<std::string>& allowed) const;

 private:
  std::map<std::string, std::string> kv_;
};

} // namespace dmo
