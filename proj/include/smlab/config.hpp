#pragma once

#include <map>
#include <string>
#include <vector>

#include "smlab/common.hpp"

namespace smlab {

/// One "[name]" or "[task type]" block of key = value lines.
struct ConfigSection {
  std::string name;
  std::string arg;  ///< task type for "[task <type>]" sections
  int line = 0;
  std::map<std::string, std::string> values;
  std::map<std::string, int> value_lines;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  const std::string& raw(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;
  std::vector<double> get_list(const std::string& key) const;
};

/// Key/value text with nested sections: top-level pairs, then "[section]"
/// blocks; '#' starts a comment; task sections may repeat and keep file order.
struct Config {
  std::map<std::string, std::string> top;
  std::vector<ConfigSection> sections;

  static Config parse(const std::string& text);
  static Config parse_file(const std::string& path);

  bool has_section(const std::string& name) const;
  const ConfigSection& section(const std::string& name) const;
  std::vector<const ConfigSection*> tasks() const;
  std::string top_string(const std::string& key, const std::string& fallback) const;
  std::uint64_t top_seed(const std::string& key, std::uint64_t fallback) const;
};

}  // namespace smlab
