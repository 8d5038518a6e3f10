#pragma once

// Spreadsheet-formula subset used by quantity and answer annotations:
// arithmetic, comparisons, SUM/AVERAGE/MAX/MIN/COUNT/SMALL/LARGE/XLOOKUP/IF
// over A1 references.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hitab/table.hpp"

namespace hitab {

enum class FormulaKind { Number, String, CellRef, Range, UnaryNeg, Percent, BinOp, Compare, Call };

enum class CompareOp { Gt, Lt, Ge, Le, Eq };

constexpr std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Gt: return ">";
    case CompareOp::Lt: return "<";
    case CompareOp::Ge: return ">=";
    case CompareOp::Le: return "<=";
    case CompareOp::Eq: return "=";
  }
  return "=";
}

struct FormulaAst {
  FormulaKind kind = FormulaKind::Number;
  double number = 0.0;
  std::string name;      // function name or string literal
  CellCoord ref;         // CellRef, or Range anchor
  CellCoord ref_end;     // Range extent (inclusive)
  char op = 0;           // BinOp: + - * /
  CompareOp cmp = CompareOp::Eq;
  std::vector<FormulaAst> args;

  static FormulaAst make_number(double v) {
    FormulaAst a;
    a.kind = FormulaKind::Number;
    a.number = v;
    return a;
  }
  static FormulaAst make_ref(CellCoord c) {
    FormulaAst a;
    a.kind = FormulaKind::CellRef;
    a.ref = c;
    return a;
  }
  static FormulaAst make_range(CellCoord lo, CellCoord hi) {
    FormulaAst a;
    a.kind = FormulaKind::Range;
    a.ref = lo;
    a.ref_end = hi;
    return a;
  }
  static FormulaAst make_unary(FormulaKind kind, FormulaAst child) {
    FormulaAst a;
    a.kind = kind;
    a.args.push_back(std::move(child));
    return a;
  }
  static FormulaAst make_binop(char op, FormulaAst lhs, FormulaAst rhs) {
    FormulaAst a;
    a.kind = FormulaKind::BinOp;
    a.op = op;
    a.args.push_back(std::move(lhs));
    a.args.push_back(std::move(rhs));
    return a;
  }
  static FormulaAst make_compare(CompareOp cmp, FormulaAst lhs, FormulaAst rhs) {
    FormulaAst a;
    a.kind = FormulaKind::Compare;
    a.cmp = cmp;
    a.args.push_back(std::move(lhs));
    a.args.push_back(std::move(rhs));
    return a;
  }
  static FormulaAst make_call(std::string name, std::vector<FormulaAst> args) {
    FormulaAst a;
    a.kind = FormulaKind::Call;
    a.name = std::move(name);
    a.args = std::move(args);
    return a;
  }

  // Range cells in row-major order.
  std::vector<CellCoord> range_cells() const {
    std::vector<CellCoord> out;
    for (int r = ref.row; r <= ref_end.row; ++r) {
      for (int c = ref.col; c <= ref_end.col; ++c) out.push_back({r, c});
    }
    return out;
  }

  friend bool operator==(const FormulaAst&, const FormulaAst&) = default;
};

namespace detail {

constexpr std::string_view kFormulaFunctions[] = {"SUM", "AVERAGE", "MAX", "MIN", "COUNT",
                                                  "SMALL", "LARGE", "XLOOKUP", "IF"};

class FormulaParser {
 public:
  explicit FormulaParser(std::string_view text) : text_(text) {}

  FormulaAst parse() {
    skip_ws();
    if (!consume('=')) error("'='");
    auto ast = parse_compare();
    skip_ws();
    if (pos_ != text_.size()) error("end of formula");
    return ast;
  }

  // Parses a bare reference or range at the current position.
  std::optional<FormulaAst> parse_reference_only() {
    skip_ws();
    auto first = try_ref();
    if (!first) return std::nullopt;
    skip_ws();
    if (consume(':')) {
      skip_ws();
      auto second = try_ref();
      if (!second) error("cell reference after ':'");
      return make_range(*first, *second);
    }
    return FormulaAst::make_ref(*first);
  }

  std::size_t pos() const { return pos_; }
  bool at_end() {
    skip_ws();
    return pos_ == text_.size();
  }
  bool consume_comma() {
    skip_ws();
    return consume(',');
  }

 private:
  [[noreturn]] void error(std::string_view expected) const {
    fail(ErrorCode::ParseError, "at position " + std::to_string(pos_) + ": expected " + std::string(expected));
  }

  void skip_ws() {
    while (pos_ < text_.size() && text::is_space(text_[pos_])) ++pos_;
  }

  bool consume(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  static FormulaAst make_range(CellCoord a, CellCoord b) {
    return FormulaAst::make_range({std::min(a.row, b.row), std::min(a.col, b.col)},
                                  {std::max(a.row, b.row), std::max(a.col, b.col)});
  }

  std::optional<CompareOp> try_compare_op() {
    skip_ws();
    if (pos_ >= text_.size()) return std::nullopt;
    const char c = text_[pos_];
    const char next = pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0';
    if (c == '>' && next == '=') return pos_ += 2, CompareOp::Ge;
    if (c == '<' && next == '=') return pos_ += 2, CompareOp::Le;
    if (c == '>') return ++pos_, CompareOp::Gt;
    if (c == '<') return ++pos_, CompareOp::Lt;
    if (c == '=') return ++pos_, CompareOp::Eq;
    return std::nullopt;
  }

  FormulaAst parse_compare() {
    auto lhs = parse_additive();
    if (auto op = try_compare_op()) {
      auto rhs = parse_additive();
      const auto save = pos_;
      if (try_compare_op()) {
        pos_ = save;
        error("a single comparison (chained comparisons are not supported)");
      }
      return FormulaAst::make_compare(*op, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  FormulaAst parse_additive() {
    auto lhs = parse_multiplicative();
    for (;;) {
      const char c = peek();
      if (c != '+' && c != '-') return lhs;
      ++pos_;
      lhs = FormulaAst::make_binop(c, std::move(lhs), parse_multiplicative());
    }
  }

  FormulaAst parse_multiplicative() {
    auto lhs = parse_percent();
    for (;;) {
      const char c = peek();
      if (c != '*' && c != '/') return lhs;
      ++pos_;
      lhs = FormulaAst::make_binop(c, std::move(lhs), parse_percent());
    }
  }

  FormulaAst parse_percent() {
    auto operand = parse_unary();
    while (peek() == '%') {
      ++pos_;
      operand = FormulaAst::make_unary(FormulaKind::Percent, std::move(operand));
    }
    return operand;
  }

  FormulaAst parse_unary() {
    const char c = peek();
    if (c == '-') {
      ++pos_;
      return FormulaAst::make_unary(FormulaKind::UnaryNeg, parse_unary());
    }
    if (c == '+') {
      ++pos_;
      return parse_unary();
    }
    return parse_primary();
  }

  std::optional<CellCoord> try_ref() {
    const auto start = pos_;
    std::size_t i = pos_;
    if (i < text_.size() && text_[i] == '$') ++i;
    int col = 0;
    std::size_t letters = 0;
    while (i < text_.size() && std::isalpha(static_cast<unsigned char>(text_[i]))) {
      col = col * 26 + (std::toupper(static_cast<unsigned char>(text_[i])) - 'A' + 1);
      ++i, ++letters;
    }
    if (letters == 0 || letters > 3) return std::nullopt;
    if (i < text_.size() && text_[i] == '$') ++i;
    int row = 0;
    std::size_t digits = 0;
    while (i < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i]))) {
      row = row * 10 + (text_[i] - '0');
      ++i, ++digits;
      if (digits > 7) return std::nullopt;
    }
    if (digits == 0 || row == 0) return std::nullopt;
    if (i < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[i])) || text_[i] == '(')) {
      pos_ = start;
      return std::nullopt;
    }
    pos_ = i;
    return CellCoord{row - 1, col - 1};
  }

  FormulaAst parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) error("an operand");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto inner = parse_compare();
      if (peek() != ')') error("')'");
      ++pos_;
      return inner;
    }
    if (c == '"') return parse_string();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '$') {
      if (auto ref = parse_reference_only()) return *ref;
      return parse_call();
    }
    error("an operand");
  }

  FormulaAst parse_string() {
    ++pos_;
    std::string out;
    for (;;) {
      if (pos_ >= text_.size()) error("closing '\"'");
      const char c = text_[pos_++];
      if (c == '"') {
        if (pos_ < text_.size() && text_[pos_] == '"') {
          out.push_back('"');
          ++pos_;
          continue;
        }
        break;
      }
      out.push_back(c);
    }
    FormulaAst a;
    a.kind = FormulaKind::String;
    a.name = std::move(out);
    return a;
  }

  FormulaAst parse_number() {
    const auto start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t j = pos_ + 1;
      if (j < text_.size() && (text_[j] == '+' || text_[j] == '-')) ++j;
      if (j < text_.size() && std::isdigit(static_cast<unsigned char>(text_[j]))) {
        pos_ = j;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    if (!text::parse_decimal(text_.substr(start, pos_ - start), v)) {
      pos_ = start;
      error("a number");
    }
    return FormulaAst::make_number(v);
  }

  FormulaAst parse_call() {
    const auto start = pos_;
    std::string name;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) {
      name.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(text_[pos_]))));
      ++pos_;
    }
    if (std::find(std::begin(kFormulaFunctions), std::end(kFormulaFunctions), name) == std::end(kFormulaFunctions)) {
      pos_ = start;
      error("a cell reference or one of SUM, AVERAGE, MAX, MIN, COUNT, SMALL, LARGE, XLOOKUP, IF");
    }
    if (peek() != '(') error("'(' after " + name);
    ++pos_;
    std::vector<FormulaAst> args;
    if (peek() == ')') error("an argument");
    for (;;) {
      args.push_back(parse_compare());
      const char c = peek();
      if (c == ',') {
        ++pos_;
        continue;
      }
      if (c == ')') {
        ++pos_;
        break;
      }
      error("',' or ')'");
    }
    check_call(name, args, start);
    return FormulaAst::make_call(std::move(name), std::move(args));
  }

  void check_call(const std::string& name, const std::vector<FormulaAst>& args, std::size_t at) {
    auto bad = [&](const std::string& what) {
      pos_ = at;
      error(what);
    };
    if (name == "SMALL" || name == "LARGE") {
      if (args.size() != 2) bad(name + " with 2 arguments");
      const auto& k = args[1];
      if (k.kind == FormulaKind::Number && (k.number < 1 || std::floor(k.number) != k.number)) {
        bad(name + " rank to be a positive integer");
      }
    } else if (name == "XLOOKUP") {
      if (args.size() != 3) bad("XLOOKUP with 3 arguments");
      if (args[1].kind == FormulaKind::Range && args[2].kind == FormulaKind::Range &&
          args[1].range_cells().size() != args[2].range_cells().size()) {
        bad("XLOOKUP lookup and result ranges of equal length");
      }
    } else if (name == "IF") {
      if (args.size() != 3) bad("IF with 3 arguments");
      if (args[0].kind != FormulaKind::Compare) bad("a comparison as IF condition");
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline int precedence(const FormulaAst& a) {
  switch (a.kind) {
    case FormulaKind::Compare: return 1;
    case FormulaKind::BinOp: return (a.op == '+' || a.op == '-') ? 2 : 3;
    case FormulaKind::Percent: return 4;
    case FormulaKind::UnaryNeg: return 5;
    default: return 6;
  }
}

inline std::string render_expr(const FormulaAst& a);

inline std::string render_child(const FormulaAst& child, int min_prec) {
  auto s = render_expr(child);
  return precedence(child) < min_prec ? "(" + s + ")" : s;
}

inline std::string render_expr(const FormulaAst& a) {
  switch (a.kind) {
    case FormulaKind::Number: return text::format_number(a.number);
    case FormulaKind::String: {
      std::string out = "\"";
      for (char c : a.name) {
        if (c == '"') out += '"';
        out += c;
      }
      return out + "\"";
    }
    case FormulaKind::CellRef: return to_a1(a.ref);
    case FormulaKind::Range: return to_a1(a.ref) + ":" + to_a1(a.ref_end);
    case FormulaKind::UnaryNeg: return "-" + render_child(a.args[0], 5);
    case FormulaKind::Percent: return render_child(a.args[0], 4) + "%";
    case FormulaKind::BinOp: {
      const int p = precedence(a);
      return render_child(a.args[0], p) + std::string(1, a.op) + render_child(a.args[1], p + 1);
    }
    case FormulaKind::Compare:
      return render_child(a.args[0], 2) + std::string(to_string(a.cmp)) + render_child(a.args[1], 2);
    case FormulaKind::Call: {
      std::string out = a.name + "(";
      for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i) out += ", ";
        out += render_expr(a.args[i]);
      }
      return out + ")";
    }
  }
  return "";
}

}  // namespace detail

inline FormulaAst parse_formula(std::string_view text) { return detail::FormulaParser(text).parse(); }

inline std::string render_formula(const FormulaAst& ast) { return "=" + detail::render_expr(ast); }

// Answer-cell annotations: "B7", "A3, A4", "A3:A5", optionally prefixed by '='.
inline std::vector<CellCoord> parse_cell_refs(std::string_view text) {
  auto body = text::trim(text);
  if (!body.empty() && body.front() == '=') body.remove_prefix(1);
  detail::FormulaParser parser(body);
  std::vector<CellCoord> out;
  do {
    auto ref = parser.parse_reference_only();
    if (!ref) fail(ErrorCode::ParseError, "at position " + std::to_string(parser.pos()) + ": expected a cell reference");
    if (ref->kind == FormulaKind::Range) {
      for (auto c : ref->range_cells()) out.push_back(c);
    } else {
      out.push_back(ref->ref);
    }
  } while (parser.consume_comma());
  if (!parser.at_end()) fail(ErrorCode::ParseError, "at position " + std::to_string(parser.pos()) + ": expected ','");
  return out;
}

namespace detail {

constexpr double kLookupTolerance = 1e-9;

struct FormulaValue {
  bool is_range = false;
  CellValue scalar;
  std::vector<CellValue> cells;
};

class FormulaEvaluator {
 public:
  explicit FormulaEvaluator(const HierTable& table) : table_(table) {}

  FormulaValue eval(const FormulaAst& a) const {
    switch (a.kind) {
      case FormulaKind::Number: return scalar(CellValue::number(a.number));
      case FormulaKind::String: return scalar(CellValue::text(a.name));
      case FormulaKind::CellRef: return scalar(cell(a.ref));
      case FormulaKind::Range: {
        FormulaValue v;
        v.is_range = true;
        for (auto c : a.range_cells()) v.cells.push_back(cell(c));
        return v;
      }
      case FormulaKind::UnaryNeg: return number(-numeric(a.args[0]));
      case FormulaKind::Percent: return number(numeric(a.args[0]) / 100.0);
      case FormulaKind::BinOp: {
        const double x = numeric(a.args[0]);
        const double y = numeric(a.args[1]);
        switch (a.op) {
          case '+': return number(x + y);
          case '-': return number(x - y);
          case '*': return number(x * y);
          default:
            if (y == 0.0) fail(ErrorCode::DivisionByZero, "division by zero");
            return number(x / y);
        }
      }
      case FormulaKind::Compare: return number(compare(a) ? 1.0 : 0.0);
      case FormulaKind::Call: return call(a);
    }
    fail(ErrorCode::TypeMismatch, "unknown formula node");
  }

 private:
  static FormulaValue scalar(CellValue v) {
    FormulaValue out;
    out.scalar = std::move(v);
    return out;
  }
  static FormulaValue number(double v) {
    if (!std::isfinite(v)) fail(ErrorCode::DivisionByZero, "non-finite result");
    return scalar(CellValue::number(v));
  }

  CellValue cell(CellCoord c) const {
    if (!table_.grid().in_bounds(c)) fail(ErrorCode::RefOutOfBounds, to_a1(c) + " outside the table");
    return table_.cell(c.row, c.col).value;
  }

  double numeric(const FormulaAst& a) const {
    const auto v = eval(a);
    if (v.is_range) fail(ErrorCode::TypeMismatch, "range used where a number is required");
    if (!v.scalar.is_number()) fail(ErrorCode::TypeMismatch, "non-numeric operand '" + v.scalar.render() + "'");
    return v.scalar.as_number();
  }

  static bool values_equal(const CellValue& a, const CellValue& b) {
    if (a.is_number() && b.is_number()) {
      return std::abs(a.as_number() - b.as_number()) <= kLookupTolerance;
    }
    return text::normalize_header_text(a.render()) == text::normalize_header_text(b.render());
  }

  bool compare(const FormulaAst& a) const {
    const auto lhs = eval(a.args[0]);
    const auto rhs = eval(a.args[1]);
    if (lhs.is_range || rhs.is_range) fail(ErrorCode::TypeMismatch, "range in comparison");
    if (a.cmp == CompareOp::Eq) return values_equal(lhs.scalar, rhs.scalar);
    if (!lhs.scalar.is_number() || !rhs.scalar.is_number()) {
      fail(ErrorCode::TypeMismatch, "ordering comparison needs numbers");
    }
    const double x = lhs.scalar.as_number(), y = rhs.scalar.as_number();
    switch (a.cmp) {
      case CompareOp::Gt: return x > y;
      case CompareOp::Lt: return x < y;
      case CompareOp::Ge: return x >= y;
      case CompareOp::Le: return x <= y;
      case CompareOp::Eq: break;
    }
    return false;
  }

  // Numeric values of the arguments; non-numeric cells are skipped.
  std::vector<double> numerics(const std::vector<FormulaAst>& args) const {
    std::vector<double> out;
    for (const auto& arg : args) {
      const auto v = eval(arg);
      if (v.is_range) {
        for (const auto& c : v.cells) {
          if (c.is_number()) out.push_back(c.as_number());
        }
      } else if (v.scalar.is_number()) {
        out.push_back(v.scalar.as_number());
      }
    }
    return out;
  }

  std::vector<CellValue> range_values(const FormulaAst& a) const {
    const auto v = eval(a);
    if (!v.is_range) return {v.scalar};
    return v.cells;
  }

  FormulaValue call(const FormulaAst& a) const {
    const auto& name = a.name;
    if (name == "COUNT") return number(static_cast<double>(numerics(a.args).size()));
    if (name == "SUM" || name == "AVERAGE" || name == "MAX" || name == "MIN") {
      const auto xs = numerics(a.args);
      if (xs.empty()) fail(ErrorCode::EmptyAggregate, name + " over cells with no numbers");
      double acc = 0.0;
      if (name == "MAX") return number(*std::max_element(xs.begin(), xs.end()));
      if (name == "MIN") return number(*std::min_element(xs.begin(), xs.end()));
      for (double x : xs) acc += x;
      return number(name == "SUM" ? acc : acc / static_cast<double>(xs.size()));
    }
    if (name == "SMALL" || name == "LARGE") {
      auto xs = numerics({a.args[0]});
      if (xs.empty()) fail(ErrorCode::EmptyAggregate, name + " over cells with no numbers");
      const double k = numeric(a.args[1]);
      if (k < 1 || std::floor(k) != k) fail(ErrorCode::TypeMismatch, name + " rank must be a positive integer");
      const auto rank = static_cast<std::size_t>(k);
      if (rank > xs.size()) fail(ErrorCode::RankOutOfRange, name + " rank exceeds the number of values");
      std::sort(xs.begin(), xs.end());
      return number(name == "SMALL" ? xs[rank - 1] : xs[xs.size() - rank]);
    }
    if (name == "XLOOKUP") {
      const auto needle = eval(a.args[0]);
      if (needle.is_range) fail(ErrorCode::TypeMismatch, "XLOOKUP needle must be a single value");
      const auto lookup = range_values(a.args[1]);
      const auto result = range_values(a.args[2]);
      if (lookup.size() != result.size()) fail(ErrorCode::TypeMismatch, "XLOOKUP ranges differ in length");
      for (std::size_t i = 0; i < lookup.size(); ++i) {
        if (values_equal(lookup[i], needle.scalar)) return scalar(result[i]);
      }
      fail(ErrorCode::LookupMiss, "XLOOKUP found no entry equal to '" + needle.scalar.render() + "'");
    }
    if (name == "IF") return eval(compare(a.args[0]) ? a.args[1] : a.args[2]);
    fail(ErrorCode::ParseError, "unsupported function " + name);
  }

  const HierTable& table_;
};

}  // namespace detail

inline CellValue eval_formula(const FormulaAst& ast, const HierTable& table) {
  const auto v = detail::FormulaEvaluator(table).eval(ast);
  if (v.is_range) {
    if (v.cells.size() == 1) return v.cells.front();
    fail(ErrorCode::TypeMismatch, "formula evaluates to a range, not a value");
  }
  return v.scalar;
}

enum class OperatorLabel {
  Opposite,
  Percent,
  Sum,
  Average,
  Max,
  Min,
  Count,
  Diff,
  Div,
  KthArgmin,
  KthArgmax,
  PairArgmax,
  PairArgmin,
};

constexpr std::string_view to_string(OperatorLabel l) {
  switch (l) {
    case OperatorLabel::Opposite: return "opposite";
    case OperatorLabel::Percent: return "percent";
    case OperatorLabel::Sum: return "sum";
    case OperatorLabel::Average: return "average";
    case OperatorLabel::Max: return "max";
    case OperatorLabel::Min: return "min";
    case OperatorLabel::Count: return "count";
    case OperatorLabel::Diff: return "diff";
    case OperatorLabel::Div: return "div";
    case OperatorLabel::KthArgmin: return "kth-argmin";
    case OperatorLabel::KthArgmax: return "kth-argmax";
    case OperatorLabel::PairArgmax: return "pair-argmax";
    case OperatorLabel::PairArgmin: return "pair-argmin";
  }
  return "";
}

inline std::optional<OperatorLabel> parse_operator_label(std::string_view s) {
  const auto lower = text::to_lower(text::trim(s));
  for (int i = 0; i <= static_cast<int>(OperatorLabel::PairArgmin); ++i) {
    const auto l = static_cast<OperatorLabel>(i);
    if (to_string(l) == lower) return l;
  }
  if (lower == "difference") return OperatorLabel::Diff;
  if (lower == "division" || lower == "proportion") return OperatorLabel::Div;
  if (lower == "argmax") return OperatorLabel::KthArgmax;
  if (lower == "argmin") return OperatorLabel::KthArgmin;
  return std::nullopt;
}

struct LabeledNode {
  OperatorLabel label;
  const FormulaAst* node;
};

// Operator-bearing nodes in preorder. The ranking call inside XLOOKUP is part
// of the argmin/argmax template and gets no label of its own.
inline std::vector<LabeledNode> label_nodes(const FormulaAst& ast) {
  std::vector<LabeledNode> out;
  auto visit = [&](auto&& self, const FormulaAst& a, bool suppress) -> void {
    std::optional<OperatorLabel> label;
    std::size_t skip_child = a.args.size();
    switch (a.kind) {
      case FormulaKind::UnaryNeg: label = OperatorLabel::Opposite; break;
      case FormulaKind::Percent: label = OperatorLabel::Percent; break;
      case FormulaKind::BinOp:
        if (a.op == '-') label = OperatorLabel::Diff;
        if (a.op == '/') label = OperatorLabel::Div;
        if (a.op == '+') label = OperatorLabel::Sum;
        break;
      case FormulaKind::Call:
        if (a.name == "SUM") label = OperatorLabel::Sum;
        if (a.name == "AVERAGE") label = OperatorLabel::Average;
        if (a.name == "MAX") label = OperatorLabel::Max;
        if (a.name == "MIN") label = OperatorLabel::Min;
        if (a.name == "COUNT") label = OperatorLabel::Count;
        if (a.name == "XLOOKUP" && a.args[0].kind == FormulaKind::Call) {
          const auto& rank = a.args[0].name;
          if (rank == "SMALL" || rank == "MIN") label = OperatorLabel::KthArgmin;
          if (rank == "LARGE" || rank == "MAX") label = OperatorLabel::KthArgmax;
          if (label) skip_child = 0;
        }
        if (a.name == "IF") {
          const auto cmp = a.args[0].cmp;
          const bool refs = a.args[1].kind == FormulaKind::CellRef && a.args[2].kind == FormulaKind::CellRef;
          if (refs && (cmp == CompareOp::Gt || cmp == CompareOp::Ge)) label = OperatorLabel::PairArgmax;
          if (refs && (cmp == CompareOp::Lt || cmp == CompareOp::Le)) label = OperatorLabel::PairArgmin;
        }
        break;
      default: break;
    }
    if (label && !suppress) out.push_back({*label, &a});
    for (std::size_t i = 0; i < a.args.size(); ++i) self(self, a.args[i], i == skip_child);
  };
  visit(visit, ast, false);
  return out;
}

struct Alignment {
  std::vector<OperatorLabel> operators;
  std::vector<CellCoord> cells;
};

// Operator labels (first occurrence order, no duplicates) and every cell the
// formula reads, ranges expanded.
inline Alignment extract_alignment(const FormulaAst& ast) {
  Alignment out;
  for (const auto& ln : label_nodes(ast)) {
    if (std::find(out.operators.begin(), out.operators.end(), ln.label) == out.operators.end()) {
      out.operators.push_back(ln.label);
    }
  }
  auto visit = [&](auto&& self, const FormulaAst& a) -> void {
    auto add = [&](CellCoord c) {
      if (std::find(out.cells.begin(), out.cells.end(), c) == out.cells.end()) out.cells.push_back(c);
    };
    if (a.kind == FormulaKind::CellRef) add(a.ref);
    if (a.kind == FormulaKind::Range) {
      for (auto c : a.range_cells()) add(c);
    }
    for (const auto& child : a.args) self(self, child);
  };
  visit(visit, ast);
  return out;
}

// Alignment of a stored annotation: a formula ("=...") or a list of answer
// cell references ("B7", "A3, A4"), which carries no operator.
inline Alignment annotation_alignment(std::string_view annotation) {
  const auto body = text::trim(annotation);
  if (!body.empty() && body.front() == '=') {
    try {
      return extract_alignment(parse_formula(body));
    } catch (const Error&) {
      // fall through: "=A3, A4" is a reference list, not a formula
    }
  }
  return Alignment{{}, parse_cell_refs(body)};
}

}  // namespace hitab
