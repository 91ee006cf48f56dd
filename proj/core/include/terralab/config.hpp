#pragma once

#include <map>
#include <string>
#include <vector>

#include "terralab/common.hpp"

namespace terralab {

// Flat key-value experiment configuration.
//
// Grammar, one entry per line:
//   key = value          key: dot-separated identifiers; value: rest of line
//   # comment            blank lines ignored; '#' starts a comment anywhere
//
// Values are read on demand as a string, a real, an integer, a boolean
// (true/false/1/0), or a whitespace-separated list of reals. Duplicate keys
// are a ConfigError. The original text of every entry is kept so manifests
// can embed an exact echo of the parsed config.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_real(const std::string& key) const;
  double get_real(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_reals(const std::string& key) const;
  std::vector<double> get_reals(const std::string& key,
                                const std::vector<double>& fallback) const;

  // Insertion-ordered keys, for echoes and strict-schema validation.
  const std::vector<std::string>& keys() const { return order_; }
  const std::string& origin() const { return origin_; }

  // Keys that were never read by any get_*; used to reject typos.
  std::vector<std::string> unread_keys() const;

  // Exact echo: "key = value" lines in input order.
  std::string echo() const;

 private:
  std::string origin_;
  std::vector<std::string> order_;
  std::map<std::string, std::string> entries_;
  mutable std::map<std::string, bool> read_;
  const std::string& fetch(const std::string& key) const;
};

}  // namespace terralab
