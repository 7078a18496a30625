#include "dmo/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dmo/errors.hpp"
#include "dmo/util.hpp"

namespace dmo {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end == t.c_str() || *end != '\0')
    throw ConfigError("key '" + key + "': cannot parse '" + t +
                      "' as a number");
  return v;
}

} // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) +
                          ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected key = value, got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    if (cfg.kv_.count(key))
      throw ConfigError("key '" + key + "' appears twice");
    cfg.kv_[key] = value;
  }
  return cfg;
}

std::string Config::get_string(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("missing required key '" + key + "'");
  return it->second;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

long Config::get_int(const std::string& key) const {
  const std::string t = get_string(key);
  char* end = nullptr;
  const long v = std::strtol(t.c_str(), &end, 10);
  if (end == t.c_str() || *end != '\0')
    throw ConfigError("key '" + key + "': cannot parse '" + t +
                      "' as an integer");
  return v;
}

long Config::get_int(const std::string& key, long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

double Config::get_double(const std::string& key) const {
  return parse_double(key, get_string(key));
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::vector<double> Config::get_list(const std::string& key) const {
  const std::string text = get_string(key);
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty())
      throw ConfigError("key '" + key + "': empty list element");
    out.push_back(parse_double(key, item));
  }
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

std::vector<double> Config::get_list(
    const std::string& key, const std::vector<double>& fallback) const {
  return has(key) ? get_list(key) : fallback;
}

std::vector<Point> Config::get_points(const std::string& key) const {
  const std::string text = get_string(key);
  std::vector<Point> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("key '" + key + "': empty point");
    const std::size_t colon = item.find(':');
    if (colon == std::string::npos)
      throw ConfigError("key '" + key + "': point '" + item +
                        "' is not x:y");
    out.push_back({parse_double(key, item.substr(0, colon)),
                   parse_double(key, item.substr(colon + 1))});
  }
  if (out.empty()) throw ConfigError("key '" + key + "': empty point list");
  return out;
}

std::vector<Point> Config::get_points(
    const std::string& key, const std::vector<Point>& fallback) const {
  return has(key) ? get_points(key) : fallback;
}

void Config::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

std::uint64_t Config::hash() const {
  std::string canon;
  for (const auto& [k, v] : kv_) {
    canon += k;
    canon += '=';
    canon += v;
    canon += '\n';
  }
  return fnv1a(canon);
}

std::string Config::hash_hex() const { return hex64(hash()); }

void Config::restrict_keys(const std::vector<std::string>& allowed) const {
  for (const auto& [k, v] : kv_) {
    (void)v;
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw ConfigError("unknown key '" + k + "' for this experiment");
  }
}

} // namespace dmo
