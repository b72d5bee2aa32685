#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "msgn/error.hpp"

namespace msgn::io {

/// Malformed configuration text or an unusable value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline bool valid_key(std::string_view k) {
  if (k.empty() || k.front() == '.' || k.back() == '.') return false;
  for (char c : k) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '.';
    if (!ok) return false;
  }
  return true;
}

inline bool parse_plain_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

// Decimal number or ratio p/q.
inline bool parse_number(std::string_view s, double& out) {
  s = trim(s);
  const auto slash = s.find('/');
  if (slash == std::string_view::npos) return parse_plain_double(s, out);
  double num = 0.0, den = 0.0;
  if (!parse_plain_double(trim(s.substr(0, slash)), num) || !parse_plain_double(trim(s.substr(slash + 1)), den)) {
    return false;
  }
  if (den == 0.0) return false;
  out = num / den;
  return true;
}

}  // namespace detail

/**
 * Flat "section.key = value" configuration.
 *
 * Blank lines and text after '#' are ignored. Every value read through a getter,
 * including defaults, is recorded so the fully resolved set can be echoed.
 */
class Config {
 public:
  static Config parse(std::string_view text, const std::string& origin = "config") {
    Config c;
    c.origin_ = origin;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto end = text.find('\n', pos);
      std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
      pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) c.fail(line_no, "expected 'key = value'");
      const std::string key(detail::trim(line.substr(0, eq)));
      const std::string value(detail::trim(line.substr(eq + 1)));
      if (!detail::valid_key(key)) c.fail(line_no, "invalid key '" + key + "'");
      if (value.empty()) c.fail(line_no, "key '" + key + "' has no value");
      if (c.entries_.count(key)) c.fail(line_no, "duplicate key '" + key + "'");
      c.entries_[key] = {value, line_no};
    }
    return c;
  }

  static Config load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string() + ": cannot open configuration file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  /// Replaces or adds a value, as if it had been written in the file.
  void set(const std::string& key, const std::string& value) { entries_[key] = {value, 0}; }

  std::string get_string(const std::string& key) { return record(key, raw(key)); }
  std::string get_string(const std::string& key, const std::string& fallback) {
    return has(key) ? get_string(key) : record(key, fallback);
  }

  double get_double(const std::string& key) { return to_double(key, get_string(key)); }
  double get_double(const std::string& key, double fallback) {
    return has(key) ? get_double(key) : (record(key, format_double(fallback)), fallback);
  }

  int get_int(const std::string& key) { return to_int(key, get_string(key)); }
  int get_int(const std::string& key, int fallback) {
    return has(key) ? get_int(key) : (record(key, std::to_string(fallback)), fallback);
  }

  bool get_bool(const std::string& key, bool fallback) {
    if (!has(key)) {
      record(key, fallback ? "true" : "false");
      return fallback;
    }
    const std::string v = get_string(key);
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    fail_key(key, "expected a boolean, got '" + v + "'");
  }

  /// Comma-separated list, each item a number or ratio p/q.
  std::vector<double> get_doubles(const std::string& key) {
    std::vector<double> out;
    for (const std::string& item : get_items(key)) out.push_back(to_double(key, item));
    return out;
  }

  std::vector<std::string> get_items(const std::string& key) {
    const std::string v = get_string(key);
    std::vector<std::string> items;
    std::size_t pos = 0;
    while (pos <= v.size()) {
      const auto comma = v.find(',', pos);
      const std::string item(detail::trim(std::string_view(v).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos)));
      if (item.empty()) fail_key(key, "empty list item");
      items.push_back(item);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    return items;
  }

  /// Throws for any key in the file that no getter asked for.
  void reject_unused() const {
    for (const auto& [key, e] : entries_) {
      if (!resolved_.count(key)) fail(e.line, "unknown key '" + key + "'");
    }
  }

  /// Every value read so far, including defaults, sorted by key.
  const std::map<std::string, std::string>& resolved() const { return resolved_; }

  std::string echo() const {
    std::string out;
    for (const auto& [k, v] : resolved_) out += k + " = " + v + "\n";
    return out;
  }

  [[noreturn]] void fail_key(const std::string& key, const std::string& what) const {
    const auto it = entries_.find(key);
    const int line = it == entries_.end() ? 0 : it->second.line;
    fail(line, "key '" + key + "': " + what);
  }

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };

  [[noreturn]] void fail(int line, const std::string& what) const {
    if (line > 0) throw ConfigError(origin_ + ":" + std::to_string(line) + ": " + what);
    throw ConfigError(origin_ + ": " + what);
  }

  const std::string& raw(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) fail(0, "missing required key '" + key + "'");
    return it->second.value;
  }

  std::string record(const std::string& key, const std::string& value) {
    resolved_[key] = value;
    return value;
  }

  double to_double(const std::string& key, const std::string& v) const {
    double d = 0.0;
    if (!detail::parse_number(v, d)) fail_key(key, "expected a number, got '" + v + "'");
    return d;
  }

  int to_int(const std::string& key, const std::string& v) const {
    int i = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), i);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) fail_key(key, "expected an integer, got '" + v + "'");
    return i;
  }

  std::string origin_;
  std::map<std::string, Entry> entries_;
  std::map<std::string, std::string> resolved_;
};

}  // namespace msgn::io
