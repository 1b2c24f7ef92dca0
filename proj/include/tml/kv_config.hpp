#pragma once

// Line-oriented `key = value` configuration text. Values are scalars or
// bracketed lists (`[a, b]`, `[[0, 1], [1, 2]]`); `#` starts a comment.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tml/error.hpp"

namespace tml {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    s = s.substr(1, s.size() - 2);
  return std::string(s);
}

/// Splits the inside of a bracketed list at top-level commas.
inline std::vector<std::string_view> split_list(std::string_view s, const std::string& key) {
  s = trim(s);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']')
    fail_validation("config key '" + key + "': expected a bracketed list");
  s = s.substr(1, s.size() - 2);
  std::vector<std::string_view> items;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '[') ++depth;
    if (c == ']') --depth;
    if (depth < 0) fail_validation("config key '" + key + "': unbalanced brackets");
    if (c == ',' && depth == 0) {
      items.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  if (depth != 0) fail_validation("config key '" + key + "': unbalanced brackets");
  const auto tail = trim(s.substr(start));
  if (!tail.empty() || !items.empty()) items.push_back(tail);
  for (const auto item : items)
    if (item.empty()) fail_validation("config key '" + key + "': empty list element");
  return items;
}

template <class T>
T parse_number(std::string_view text, const std::string& key) {
  text = trim(text);
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    fail_validation("config key '" + key + "': malformed number '" + std::string(text) + "'");
  return value;
}

}  // namespace detail

class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text) {
    KeyValueConfig cfg;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      auto nl = text.find('\n', pos);
      if (nl == std::string_view::npos) nl = text.size();
      std::string_view line = text.substr(pos, nl - pos);
      pos = nl + 1;
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos)
        fail_validation("config line " + std::to_string(line_no) + ": expected 'key = value'");
      const auto key = std::string(detail::trim(line.substr(0, eq)));
      if (key.empty()) fail_validation("config line " + std::to_string(line_no) + ": empty key");
      cfg.values_[key] = std::string(detail::trim(line.substr(eq + 1)));
    }
    return cfg;
  }

  static KeyValueConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail_io("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& entries() const { return values_; }

  std::string get_string(const std::string& key) const { return detail::unquote(raw(key)); }
  double get_double(const std::string& key) const { return detail::parse_number<double>(raw(key), key); }
  std::int64_t get_int(const std::string& key) const {
    return detail::parse_number<std::int64_t>(raw(key), key);
  }
  bool get_bool(const std::string& key) const {
    const auto v = get_string(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail_validation("config key '" + key + "': expected a boolean, got '" + v + "'");
  }

  std::vector<std::string> get_string_list(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto item : detail::split_list(raw(key), key)) out.push_back(detail::unquote(item));
    return out;
  }

  std::vector<std::int64_t> get_int_list(const std::string& key) const {
    std::vector<std::int64_t> out;
    for (const auto item : detail::split_list(raw(key), key))
      out.push_back(detail::parse_number<std::int64_t>(item, key));
    return out;
  }

  std::vector<std::vector<std::int64_t>> get_int_matrix(const std::string& key) const {
    std::vector<std::vector<std::int64_t>> out;
    for (const auto row : detail::split_list(raw(key), key)) {
      auto& dst = out.emplace_back();
      for (const auto item : detail::split_list(row, key))
        dst.push_back(detail::parse_number<std::int64_t>(item, key));
    }
    return out;
  }

 private:
  const std::string& raw(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) fail_validation("config key '" + key + "' is missing");
    return it->second;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace tml
