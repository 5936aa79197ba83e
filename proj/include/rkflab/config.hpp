#ifndef RKFLAB_CONFIG_HPP_
#define RKFLAB_CONFIG_HPP_

#include <map>
#include <string>
#include <vector>

namespace rkflab {

// Minimal TOML-style config reader: [section] headers, key = value pairs,
// strings in double quotes, numbers, booleans, flat arrays, # comments.
// Keys are addressed as "section.key".
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& key) const;

 private:
  const std::vector<std::string>& tokens(const std::string& key) const;

  std::map<std::string, std::vector<std::string>> values_;  // key -> value tokens
  std::string origin_;
};

}  // namespace rkflab

#endif  // RKFLAB_CONFIG_HPP_
