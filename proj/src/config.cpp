#include "smlab/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace smlab {

namespace {
std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  auto b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

[[noreturn]] void parse_fail(int line, int col, const std::string& msg) {
  fail(ErrCode::parse,
       "config line " + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
}
}  // namespace

const std::string& ConfigSection::raw(const std::string& key) const {
  auto it = values.find(key);
  require(it != values.end(), ErrCode::parse,
          "config section [" + name + (arg.empty() ? "" : " " + arg) + "] (line " +
              std::to_string(line) + "): missing key '" + key + "'");
  return it->second;
}

std::string ConfigSection::get_string(const std::string& key,
                                      const std::string& fallback) const {
  return has(key) ? raw(key) : fallback;
}

double ConfigSection::get_double(const std::string& key) const {
  const std::string& v = raw(key);
  try {
    std::size_t used = 0;
    double x = std::stod(v, &used);
    require(trim(v.substr(used)).empty(), ErrCode::parse, "");
    return x;
  } catch (const std::exception&) {
    fail(ErrCode::parse, "config key '" + key + "' (line " +
                             std::to_string(value_lines.count(key) ? value_lines.at(key) : line) +
                             "): expected a number, got '" + v + "'");
  }
}

double ConfigSection::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int ConfigSection::get_int(const std::string& key) const {
  double v = get_double(key);
  int i = static_cast<int>(v);
  require(static_cast<double>(i) == v, ErrCode::parse,
          "config key '" + key + "': expected an integer");
  return i;
}

int ConfigSection::get_int(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t ConfigSection::get_seed(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  try {
    return std::stoull(raw(key));
  } catch (const std::exception&) {
    fail(ErrCode::parse, "config key '" + key + "': expected a seed");
  }
}

std::vector<double> ConfigSection::get_list(const std::string& key) const {
  std::istringstream ss(raw(key));
  std::vector<double> out;
  std::string tok;
  while (ss >> tok) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      fail(ErrCode::parse, "config key '" + key + "': bad list entry '" + tok + "'");
    }
  }
  require(!out.empty(), ErrCode::parse, "config key '" + key + "': empty list");
  return out;
}

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  ConfigSection* current = nullptr;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        parse_fail(lineno, static_cast<int>(line.find('[')) + 1, "unterminated section header");
      std::string inner = trim(t.substr(1, t.size() - 2));
      if (inner.empty()) parse_fail(lineno, 1, "empty section name");
      ConfigSection sec;
      sec.line = lineno;
      auto space_pos = inner.find_first_of(" \t");
      if (space_pos == std::string::npos) {
        sec.name = inner;
      } else {
        sec.name = inner.substr(0, space_pos);
        sec.arg = trim(inner.substr(space_pos));
      }
      cfg.sections.push_back(std::move(sec));
      current = &cfg.sections.back();
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos)
      parse_fail(lineno, 1, "expected 'key = value' or a [section] header");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) parse_fail(lineno, 1, "empty key");
    if (current == nullptr) {
      cfg.top[key] = value;
    } else {
      current->values[key] = value;
      current->value_lines[key] = lineno;
    }
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), ErrCode::io, "cannot open config: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse(ss.str());
}

bool Config::has_section(const std::string& name) const {
  return std::any_of(sections.begin(), sections.end(),
                     [&](const ConfigSection& s) { return s.name == name; });
}

const ConfigSection& Config::section(const std::string& name) const {
  for (const auto& s : sections)
    if (s.name == name) return s;
  fail(ErrCode::parse, "config: missing section [" + name + "]");
}

std::vector<const ConfigSection*> Config::tasks() const {
  std::vector<const ConfigSection*> out;
  for (const auto& s : sections)
    if (s.name == "task") out.push_back(&s);
  return out;
}

std::string Config::top_string(const std::string& key, const std::string& fallback) const {
  auto it = top.find(key);
  return it == top.end() ? fallback : it->second;
}

std::uint64_t Config::top_seed(const std::string& key, std::uint64_t fallback) const {
  auto it = top.find(key);
  if (it == top.end()) return fallback;
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    fail(ErrCode::parse, "config key '" + key + "': expected a seed");
  }
}

}  // namespace smlab
