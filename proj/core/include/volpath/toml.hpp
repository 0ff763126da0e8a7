#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace volpath {

/// Strict subset of TOML: single-level [tables], bare keys, strings,
/// integers, floats, booleans and flat arrays. Covers run configuration
/// files; anything else is rejected with a line number.
class TomlTable {
 public:
  using Scalar = std::variant<bool, long long, double, std::string>;
  struct Value {
    Scalar scalar;
    std::vector<Scalar> array;
    bool is_array = false;
  };

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_array(const std::string& key,
                                       const std::vector<double>& fallback) const;
  std::vector<std::string> get_string_array(const std::string& key,
                                            const std::vector<std::string>& fallback) const;
  std::vector<int> get_int_array(const std::string& key, const std::vector<int>& fallback) const;

  void set(const std::string& key, Value value) { entries_[key] = std::move(value); }
  const std::map<std::string, Value>& entries() const { return entries_; }

 private:
  const Value* find(const std::string& key) const;
  std::map<std::string, Value> entries_;  // dotted keys, "section.key"
};

TomlTable parse_toml(const std::string& text);
TomlTable parse_toml_file(const std::string& path);

}  // namespace volpath
