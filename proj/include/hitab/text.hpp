#pragma once

// String utilities shared by every module: header normalization, question
// tokenization and stable number rendering.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace hitab::text {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

inline std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending = false;
  for (char c : trim(s)) {
    if (is_space(c)) {
      pending = true;
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

// Length in bytes of a trailing footnote glyph (superscript digit or letter,
// dagger, asterisk), or 0 when the string does not end in one.
inline std::size_t trailing_marker_glyph(std::string_view s) {
  const auto n = s.size();
  if (n >= 1 && s[n - 1] == '*') return 1;
  if (n >= 2) {
    const auto b0 = static_cast<unsigned char>(s[n - 2]);
    const auto b1 = static_cast<unsigned char>(s[n - 1]);
    // U+00B9 U+00B2 U+00B3
    if (b0 == 0xC2 && (b1 == 0xB9 || b1 == 0xB2 || b1 == 0xB3)) return 2;
  }
  if (n >= 3) {
    const auto b0 = static_cast<unsigned char>(s[n - 3]);
    const auto b1 = static_cast<unsigned char>(s[n - 2]);
    const auto b2 = static_cast<unsigned char>(s[n - 1]);
    if (b0 == 0xE2) {
      // U+2070..U+209F superscripts and subscripts block
      if (b1 == 0x81 && b2 >= 0xB0) return 3;
      if (b1 == 0x82 && b2 <= 0x9F) return 3;
      // U+2020 dagger, U+2021 double dagger
      if (b1 == 0x80 && (b2 == 0xA0 || b2 == 0xA1)) return 3;
    }
    // U+1D43..U+1D5B modifier letters (superscript a..z range)
    if (b0 == 0xE1 && (b1 == 0xB5 || b1 == 0xB6)) return 3;
  }
  return 0;
}

// Bracketed marker such as "[1]" or "[a]" at the end of the string.
inline std::size_t trailing_bracket_marker(std::string_view s) {
  if (s.size() < 3 || s.back() != ']') return 0;
  const auto open = s.rfind('[');
  if (open == std::string_view::npos) return 0;
  const auto inner = s.substr(open + 1, s.size() - open - 2);
  if (inner.empty() || inner.size() > 3) return 0;
  for (char c : inner) {
    if (!std::isalnum(static_cast<unsigned char>(c))) return 0;
  }
  return s.size() - open;
}

inline std::string_view strip_footnote_markers(std::string_view s) {
  s = trim(s);
  for (;;) {
    std::size_t cut = trailing_marker_glyph(s);
    if (cut == 0) cut = trailing_bracket_marker(s);
    if (cut == 0 || cut >= s.size()) break;
    s.remove_suffix(cut);
    s = trim(s);
  }
  return s;
}

// Canonical header text: lowercase, single spaces, no trailing footnote marks.
inline std::string normalize_header_text(std::string_view raw) {
  return collapse_whitespace(to_lower(strip_footnote_markers(raw)));
}

inline std::size_t count_non_ascii_code_points(std::string_view s) {
  std::size_t count = 0;
  for (char c : s) {
    const auto b = static_cast<unsigned char>(c);
    // Count lead bytes only; continuation bytes are 10xxxxxx.
    if (b >= 0x80 && (b & 0xC0) != 0x80) ++count;
  }
  return count;
}

inline std::size_t count_whitespace_tokens(std::string_view s) {
  std::size_t count = 0;
  bool in_token = false;
  for (char c : s) {
    if (is_space(c)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++count;
    }
  }
  return count;
}

// Shortest fixed-notation decimal that round-trips; "-0" prints as "0".
inline std::string format_number(double value) {
  if (value == 0.0) return "0";
  std::array<char, 512> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::fixed);
  if (ec != std::errc{}) {
    auto [p2, e2] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), p2);
  }
  return std::string(buf.data(), ptr);
}

// Ties round away from zero. printf rounds exact ties to even, so an exact
// tie is first nudged onto the upper boundary.
inline double round_significant(double value, int digits) {
  if (value == 0.0 || !std::isfinite(value)) return value;
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.*e", digits, value);
  const std::string_view longer(buf.data());
  const auto e = longer.find('e');
  if (longer[e - 1] == '5' && std::strtod(buf.data(), nullptr) == value) {
    const int exponent = std::atoi(buf.data() + e + 1);
    value += std::copysign(5.0 * std::pow(10.0, exponent - digits), value);
  }
  std::snprintf(buf.data(), buf.size(), "%.*e", digits - 1, value);
  return std::strtod(buf.data(), nullptr);
}

// Strict decimal parse: optional sign, digits, optional fraction, optional
// exponent. Rejects inf/nan/hex and trailing garbage.
inline bool parse_decimal(std::string_view s, double& out) {
  if (s.empty()) return false;
  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') ++i;
  std::size_t digits = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
  }
  if (digits == 0) return false;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    std::size_t j = i + 1;
    if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
    std::size_t exp_digits = 0;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j, ++exp_digits;
    if (exp_digits == 0) return false;
    i = j;
  }
  if (i != s.size()) return false;
  std::string tmp(s[0] == '+' ? s.substr(1) : s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tmp.data(), tmp.data() + tmp.size(), v);
  if (ec != std::errc{} || ptr != tmp.data() + tmp.size() || !std::isfinite(v)) return false;
  out = v;
  return true;
}

// Word tokens for n-gram matching. A trailing '.' is dropped unless the token
// carries another '.' ("u.s." survives, "2012." becomes "2012").
inline std::vector<std::string> word_tokens(std::string_view s) {
  auto keep = [](char c) {
    const auto b = static_cast<unsigned char>(c);
    return std::isalnum(b) || c == '.' || c == '\'' || c == '%' || c == '-' || c == '&' ||
           b >= 0x80;
  };
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&]() {
    while (!cur.empty() && (cur.front() == '.' || cur.front() == '\'' || cur.front() == '-')) {
      cur.erase(cur.begin());
    }
    while (!cur.empty() && (cur.back() == '\'' || cur.back() == '-')) cur.pop_back();
    if (!cur.empty() && cur.back() == '.') {
      if (std::count(cur.begin(), cur.end(), '.') == 1) cur.pop_back();
    }
    while (!cur.empty() && cur.back() == '\'') cur.pop_back();
    if (!cur.empty()) out.push_back(to_lower(cur));
    cur.clear();
  };
  for (char c : s) {
    if (keep(c)) {
      cur.push_back(c);
    } else {
      flush();
    }
  }
  flush();
  return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// FNV-1a, stable across platforms (std::hash is not).
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ULL) {
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace hitab::text
