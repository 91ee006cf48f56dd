#include "terralab/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace terralab {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (cfg.entries_.count(key))
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": duplicate key '" + key + "'");
    cfg.entries_[key] = value;
    cfg.order_.push_back(key);
  }
  return cfg;
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

const std::string& Config::fetch(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end())
    throw ConfigError(origin_ + ": missing key '" + key + "'");
  read_[key] = true;
  return it->second;
}

std::string Config::get_string(const std::string& key) const { return fetch(key); }

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  return has(key) ? fetch(key) : fallback;
}

double Config::get_real(const std::string& key) const {
  const std::string& v = fetch(key);
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || v.empty())
    throw ConfigError(origin_ + ": key '" + key + "' is not a real number: '" + v + "'");
  return x;
}

double Config::get_real(const std::string& key, double fallback) const {
  return has(key) ? get_real(key) : fallback;
}

int Config::get_int(const std::string& key) const {
  const std::string& v = fetch(key);
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (end != v.c_str() + v.size() || v.empty())
    throw ConfigError(origin_ + ": key '" + key + "' is not an integer: '" + v + "'");
  return static_cast<int>(x);
}

int Config::get_int(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = fetch(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(origin_ + ": key '" + key + "' is not a boolean: '" + v + "'");
}

std::vector<double> Config::get_reals(const std::string& key) const {
  const std::string& v = fetch(key);
  std::istringstream in(v);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    char* end = nullptr;
    const double x = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size())
      throw ConfigError(origin_ + ": key '" + key + "' has a non-real entry: '" + tok + "'");
    out.push_back(x);
  }
  if (out.empty())
    throw ConfigError(origin_ + ": key '" + key + "' is an empty list");
  return out;
}

std::vector<double> Config::get_reals(const std::string& key,
                                      const std::vector<double>& fallback) const {
  return has(key) ? get_reals(key) : fallback;
}

std::vector<std::string> Config::unread_keys() const {
  std::vector<std::string> out;
  for (const auto& k : order_)
    if (!read_.count(k)) out.push_back(k);
  return out;
}

std::string Config::echo() const {
  std::string out;
  for (const auto& k : order_) {
    out += k;
    out += " = ";
    out += entries_.at(k);
    out += "\n";
  }
  return out;
}

}  // namespace terralab
