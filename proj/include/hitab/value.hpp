#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hitab/error.hpp"
#include "hitab/text.hpp"

namespace hitab {

enum class ValueKind { Empty, Number, Text, DateTime };

constexpr std::string_view to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::Empty: return "empty";
    case ValueKind::Number: return "number";
    case ValueKind::Text: return "text";
    case ValueKind::DateTime: return "datetime";
  }
  return "empty";
}

// Parsed content of a cell. Text and datetime share the string slot; the kind
// tag says which one is populated.
class CellValue {
 public:
  CellValue() = default;

  static CellValue empty() { return {}; }

  static CellValue number(double v) {
    if (!std::isfinite(v)) fail(ErrorCode::TypeMismatch, "non-finite number");
    CellValue out;
    out.kind_ = ValueKind::Number;
    out.number_ = v;
    return out;
  }

  static CellValue text(std::string s) {
    CellValue out;
    out.kind_ = ValueKind::Text;
    out.string_ = std::move(s);
    return out;
  }

  static CellValue datetime(std::string iso) {
    CellValue out;
    out.kind_ = ValueKind::DateTime;
    out.string_ = std::move(iso);
    return out;
  }

  ValueKind kind() const { return kind_; }
  bool is_number() const { return kind_ == ValueKind::Number; }
  bool is_empty() const { return kind_ == ValueKind::Empty; }

  double as_number() const {
    if (kind_ != ValueKind::Number) fail(ErrorCode::TypeMismatch, "value is not numeric");
    return number_;
  }

  // Text or ISO datetime string; empty string for numbers and empty cells.
  const std::string& as_string() const { return string_; }

  std::string render() const {
    switch (kind_) {
      case ValueKind::Number: return text::format_number(number_);
      case ValueKind::Text:
      case ValueKind::DateTime: return string_;
      case ValueKind::Empty: return "";
    }
    return "";
  }

  friend bool operator==(const CellValue& a, const CellValue& b) {
    if (a.kind_ != b.kind_) return false;
    if (a.kind_ == ValueKind::Number) return a.number_ == b.number_;
    return a.string_ == b.string_;
  }

 private:
  ValueKind kind_ = ValueKind::Empty;
  double number_ = 0.0;
  std::string string_;
};

namespace detail {

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

// YYYY-MM, YYYY-MM-DD, optionally followed by THH:MM[:SS].
inline bool looks_iso_datetime(std::string_view s) {
  if (s.size() < 7) return false;
  if (!all_digits(s.substr(0, 4)) || s[4] != '-' || !all_digits(s.substr(5, 2))) return false;
  if (s.size() == 7) return true;
  if (s[7] != '-' || s.size() < 10 || !all_digits(s.substr(8, 2))) return false;
  if (s.size() == 10) return true;
  if (s[10] != 'T' || s.size() < 16) return false;
  if (!all_digits(s.substr(11, 2)) || s[13] != ':' || !all_digits(s.substr(14, 2))) return false;
  if (s.size() == 16) return true;
  return s.size() == 19 && s[16] == ':' && all_digits(s.substr(17, 2));
}

inline bool consume_prefix(std::string_view& s, std::string_view prefix) {
  if (s.substr(0, prefix.size()) == prefix) {
    s.remove_prefix(prefix.size());
    return true;
  }
  return false;
}

inline bool consume_currency(std::string_view& s) {
  return consume_prefix(s, "$") || consume_prefix(s, "\xE2\x82\xAC") ||
         consume_prefix(s, "\xC2\xA3") || consume_prefix(s, "\xC2\xA5");
}

inline bool consume_sign(std::string_view& s, bool& negative) {
  if (consume_prefix(s, "-") || consume_prefix(s, "\xE2\x88\x92")) {
    negative = !negative;
    return true;
  }
  return consume_prefix(s, "+");
}

// Number core without footnote handling: parentheses, signs, currency,
// internal commas, trailing percent.
inline bool parse_quantity_core(std::string_view s, double& out) {
  bool negative = false;
  s = text::trim(s);
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') {
    negative = true;
    s = text::trim(s.substr(1, s.size() - 2));
  }
  consume_sign(s, negative);
  if (consume_currency(s)) consume_sign(s, negative);
  bool percent = false;
  if (!s.empty() && s.back() == '%') {
    percent = true;
    s.remove_suffix(1);
    s = text::trim(s);
  }
  std::string digits;
  digits.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == ',') {
      const bool between = i > 0 && i + 1 < s.size() &&
                           std::isdigit(static_cast<unsigned char>(s[i - 1])) &&
                           std::isdigit(static_cast<unsigned char>(s[i + 1]));
      if (!between) return false;
      continue;
    }
    digits.push_back(s[i]);
  }
  double v = 0.0;
  if (!text::parse_decimal(digits, v)) return false;
  if (percent) v /= 100.0;
  if (negative) v = -v;
  out = v;
  return true;
}

inline bool is_marker_token(std::string_view tok) {
  if (tok.size() >= 3 && tok.front() == '(' && tok.back() == ')') tok = tok.substr(1, tok.size() - 2);
  if (tok.size() == 1 && std::isalpha(static_cast<unsigned char>(tok[0]))) return true;
  return tok.size() <= 2 && all_digits(tok);
}

}  // namespace detail

// Parses a raw cell string into a typed value. Numbers tolerate internal
// commas, currency symbols, a trailing '%' (divides by 100), parenthesized
// negatives and footnote markers; everything else stays text.
inline CellValue normalize_quantity(std::string_view raw) {
  const auto trimmed = text::trim(raw);
  if (trimmed.empty()) return CellValue::empty();
  if (detail::looks_iso_datetime(trimmed)) return CellValue::datetime(std::string(trimmed));

  const auto stripped = text::strip_footnote_markers(trimmed);
  double v = 0.0;
  if (detail::parse_quantity_core(stripped, v)) return CellValue::number(v);

  // "12.3 a" / "a 12.3": a number set off from a single marker token.
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < stripped.size()) {
    while (i < stripped.size() && text::is_space(stripped[i])) ++i;
    const auto start = i;
    while (i < stripped.size() && !text::is_space(stripped[i])) ++i;
    if (i > start) tokens.push_back(stripped.substr(start, i - start));
  }
  if (tokens.size() == 2) {
    double a = 0.0, b = 0.0;
    const bool a_num = detail::parse_quantity_core(tokens[0], a);
    const bool b_num = detail::parse_quantity_core(tokens[1], b);
    if (a_num && !b_num && detail::is_marker_token(tokens[1])) return CellValue::number(a);
    if (b_num && !a_num && detail::is_marker_token(tokens[0])) return CellValue::number(b);
  }
  return CellValue::text(std::string(trimmed));
}

}  // namespace hitab
