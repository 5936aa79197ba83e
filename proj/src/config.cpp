#include "rkflab/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rkflab/errors.hpp"

namespace rkflab {

namespace {

std::string trim(const std::string& s) {
  std::size_t lo = 0;
  std::size_t hi = s.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
  return s.substr(lo, hi - lo);
}

// Strips a # comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

// Splits an array body "a, b, c" into raw value tokens.
std::vector<std::string> split_array(const std::string& body, const std::string& where) {
  std::vector<std::string> out;
  bool quoted = false;
  std::string current;
  for (char c : body) {
    if (c == '"') quoted = !quoted;
    if (c == ',' && !quoted) {
      const std::string tok = trim(current);
      if (!tok.empty()) out.push_back(tok);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  const std::string tok = trim(current);
  if (!tok.empty()) out.push_back(tok);
  if (quoted) throw ConfigError(where + ": unterminated string in array");
  return out;
}

std::string unquote(const std::string& tok, const std::string& where) {
  if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"')
    return tok.substr(1, tok.size() - 2);
  throw ConfigError(where + ": expected a quoted string, got '" + tok + "'");
}

double to_double(const std::string& tok, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw ConfigError(where + ": expected a number, got '" + tok + "'");
  return v;
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = origin + ":" + std::to_string(line_no);
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError(where + ": empty key or value");
    const std::string full_key = section.empty() ? key : section + "." + key;
    if (cfg.values_.count(full_key)) throw ConfigError(where + ": duplicate key " + full_key);
    if (value.front() == '[') {
      if (value.back() != ']') throw ConfigError(where + ": malformed array");
      cfg.values_[full_key] = split_array(value.substr(1, value.size() - 2), where);
    } else {
      cfg.values_[full_key] = {value};
    }
  }
  return cfg;
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

const std::vector<std::string>& Config::tokens(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(origin_ + ": missing key " + key);
  return it->second;
}

std::string Config::get_string(const std::string& key) const {
  const auto& toks = tokens(key);
  if (toks.size() != 1) throw ConfigError(origin_ + ": key " + key + " is not a single value");
  return unquote(toks[0], origin_ + ":" + key);
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

double Config::get_double(const std::string& key) const {
  const auto& toks = tokens(key);
  if (toks.size() != 1) throw ConfigError(origin_ + ": key " + key + " is not a single value");
  return to_double(toks[0], origin_ + ":" + key);
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long Config::get_int(const std::string& key) const {
  const double v = get_double(key);
  const long l = static_cast<long>(v);
  if (static_cast<double>(l) != v)
    throw ConfigError(origin_ + ": key " + key + " is not an integer");
  return l;
}

long Config::get_int(const std::string& key, long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto& toks = tokens(key);
  if (toks.size() == 1 && toks[0] == "true") return true;
  if (toks.size() == 1 && toks[0] == "false") return false;
  throw ConfigError(origin_ + ": key " + key + " is not a boolean");
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& tok : tokens(key)) out.push_back(to_double(tok, origin_ + ":" + key));
  return out;
}

std::vector<std::string> Config::get_string_list(const std::string& key) const {
  std::vector<std::string> out;
  for (const std::string& tok : tokens(key)) out.push_back(unquote(tok, origin_ + ":" + key));
  return out;
}

}  // namespace rkflab
