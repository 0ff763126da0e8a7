#include "volpath/toml.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "volpath/common.hpp"

namespace volpath {

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Removes a trailing comment that is not inside a string literal.
std::string strip_comment(const std::string& s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (char c : key)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  return true;
}

TomlTable::Scalar parse_scalar(const std::string& raw, int line) {
  if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
    std::string out;
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
      if (raw[i] == '\\' && i + 2 < raw.size()) {
        ++i;
        switch (raw[i]) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(line, std::string("unsupported escape \\") + raw[i]);
        }
      } else {
        out += raw[i];
      }
    }
    return out;
  }
  if (raw == "true") return true;
  if (raw == "false") return false;

  std::string digits = raw;
  digits.erase(std::remove(digits.begin(), digits.end(), '_'), digits.end());
  long long as_int = 0;
  auto [p1, e1] = std::from_chars(digits.data(), digits.data() + digits.size(), as_int);
  if (e1 == std::errc{} && p1 == digits.data() + digits.size()) return as_int;
  double as_double = 0.0;
  auto [p2, e2] = std::from_chars(digits.data(), digits.data() + digits.size(), as_double);
  if (e2 == std::errc{} && p2 == digits.data() + digits.size()) return as_double;
  fail(line, "cannot parse value '" + raw + "'");
}

std::vector<TomlTable::Scalar> parse_array(const std::string& raw, int line) {
  std::vector<TomlTable::Scalar> out;
  std::string body = strip(raw.substr(1, raw.size() - 2));
  if (body.empty()) return out;
  std::string cell;
  bool in_string = false;
  for (char c : body) {
    if (c == '"') in_string = !in_string;
    if (c == ',' && !in_string) {
      out.push_back(parse_scalar(strip(cell), line));
      cell.clear();
    } else {
      cell += c;
    }
  }
  std::string last = strip(cell);
  if (!last.empty()) out.push_back(parse_scalar(last, line));
  return out;
}

}  // namespace

const TomlTable::Value* TomlTable::find(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::string TomlTable::get_string(const std::string& key, const std::string& fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (const auto* s = std::get_if<std::string>(&v->scalar)) return *s;
  throw ConfigError("config key '" + key + "' is not a string");
}

long long TomlTable::get_int(const std::string& key, long long fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (const auto* i = std::get_if<long long>(&v->scalar)) return *i;
  throw ConfigError("config key '" + key + "' is not an integer");
}

double TomlTable::get_double(const std::string& key, double fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (const auto* d = std::get_if<double>(&v->scalar)) return *d;
  if (const auto* i = std::get_if<long long>(&v->scalar)) return static_cast<double>(*i);
  throw ConfigError("config key '" + key + "' is not a number");
}

bool TomlTable::get_bool(const std::string& key, bool fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (const auto* b = std::get_if<bool>(&v->scalar)) return *b;
  throw ConfigError("config key '" + key + "' is not a boolean");
}

std::vector<double> TomlTable::get_double_array(const std::string& key,
                                                const std::vector<double>& fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (!v->is_array) throw ConfigError("config key '" + key + "' is not an array");
  std::vector<double> out;
  for (const auto& s : v->array) {
    if (const auto* d = std::get_if<double>(&s))
      out.push_back(*d);
    else if (const auto* i = std::get_if<long long>(&s))
      out.push_back(static_cast<double>(*i));
    else
      throw ConfigError("config key '" + key + "' has a non-numeric element");
  }
  return out;
}

std::vector<int> TomlTable::get_int_array(const std::string& key,
                                          const std::vector<int>& fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (!v->is_array) throw ConfigError("config key '" + key + "' is not an array");
  std::vector<int> out;
  for (const auto& s : v->array) {
    if (const auto* i = std::get_if<long long>(&s))
      out.push_back(static_cast<int>(*i));
    else
      throw ConfigError("config key '" + key + "' has a non-integer element");
  }
  return out;
}

std::vector<std::string> TomlTable::get_string_array(
    const std::string& key, const std::vector<std::string>& fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (!v->is_array) throw ConfigError("config key '" + key + "' is not an array");
  std::vector<std::string> out;
  for (const auto& s : v->array) {
    if (const auto* str = std::get_if<std::string>(&s))
      out.push_back(*str);
    else
      throw ConfigError("config key '" + key + "' has a non-string element");
  }
  return out;
}

TomlTable parse_toml(const std::string& text) {
  TomlTable table;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string s = strip(strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line_no, "unterminated table header");
      section = strip(s.substr(1, s.size() - 2));
      if (!valid_key(section)) fail(line_no, "invalid table name '" + section + "'");
      continue;
    }
    std::size_t eq = std::string::npos;
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"') in_string = !in_string;
      if (s[i] == '=' && !in_string) {
        eq = i;
        break;
      }
    }
    if (eq == std::string::npos) fail(line_no, "expected key = value");
    std::string key = strip(s.substr(0, eq));
    std::string value = strip(s.substr(eq + 1));
    if (!valid_key(key)) fail(line_no, "invalid key '" + key + "'");
    if (value.empty()) fail(line_no, "missing value for key '" + key + "'");

    // Multi-line arrays: keep consuming until brackets balance.
    if (value.front() == '[') {
      while (std::count(value.begin(), value.end(), ']') == 0) {
        std::string more;
        if (!std::getline(in, more)) fail(line_no, "unterminated array for key '" + key + "'");
        ++line_no;
        value += strip(strip_comment(more));
      }
    }

    TomlTable::Value v;
    if (value.front() == '[') {
      if (value.back() != ']') fail(line_no, "unterminated array for key '" + key + "'");
      v.is_array = true;
      v.array = parse_array(value, line_no);
    } else {
      v.scalar = parse_scalar(value, line_no);
    }
    std::string full = section.empty() ? key : section + "." + key;
    table.set(full, std::move(v));
  }
  return table;
}

TomlTable parse_toml_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_toml(buf.str());
}

}  // namespace volpath
