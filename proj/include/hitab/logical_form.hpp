#pragma once

// Hierarchy-aware logical forms: a flat pipeline of region-selection calls
// followed by at most one region operator, written as s-expressions.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hitab/table.hpp"

namespace hitab {

enum class FuncKind {
  FilterTree,
  FilterLevel,
  Argmax,
  Argmin,
  Max,
  Min,
  Sum,
  Average,
  Count,
  Difference,
  Proportion,
  ProportionRev,
  DifferenceRate,
  DifferenceRateRev,
  GreaterThan,
  GreaterEqThan,
  LessThan,
  LessEqThan,
  Eq,
  NotEq,
  Opposite,
};

inline constexpr FuncKind kAllFuncKinds[] = {
    FuncKind::FilterTree,    FuncKind::FilterLevel,       FuncKind::Argmax,      FuncKind::Argmin,
    FuncKind::Max,           FuncKind::Min,               FuncKind::Sum,         FuncKind::Average,
    FuncKind::Count,         FuncKind::Difference,        FuncKind::Proportion,  FuncKind::ProportionRev,
    FuncKind::DifferenceRate, FuncKind::DifferenceRateRev, FuncKind::GreaterThan, FuncKind::GreaterEqThan,
    FuncKind::LessThan,      FuncKind::LessEqThan,        FuncKind::Eq,          FuncKind::NotEq,
    FuncKind::Opposite,
};

constexpr std::string_view to_string(FuncKind k) {
  switch (k) {
    case FuncKind::FilterTree: return "filter_tree";
    case FuncKind::FilterLevel: return "filter_level";
    case FuncKind::Argmax: return "argmax";
    case FuncKind::Argmin: return "argmin";
    case FuncKind::Max: return "max";
    case FuncKind::Min: return "min";
    case FuncKind::Sum: return "sum";
    case FuncKind::Average: return "average";
    case FuncKind::Count: return "count";
    case FuncKind::Difference: return "difference";
    case FuncKind::Proportion: return "proportion";
    case FuncKind::ProportionRev: return "proportion_rev";
    case FuncKind::DifferenceRate: return "difference_rate";
    case FuncKind::DifferenceRateRev: return "difference_rate_rev";
    case FuncKind::GreaterThan: return "greater_than";
    case FuncKind::GreaterEqThan: return "greater_eq_than";
    case FuncKind::LessThan: return "less_than";
    case FuncKind::LessEqThan: return "less_eq_than";
    case FuncKind::Eq: return "eq";
    case FuncKind::NotEq: return "not_eq";
    case FuncKind::Opposite: return "opposite";
  }
  return "";
}

inline std::optional<FuncKind> parse_func_kind(std::string_view name) {
  for (auto k : kAllFuncKinds) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

constexpr bool is_selection(FuncKind k) { return k == FuncKind::FilterTree || k == FuncKind::FilterLevel; }
constexpr bool is_region_op(FuncKind k) { return !is_selection(k); }
constexpr bool is_superlative(FuncKind k) { return k == FuncKind::Argmax || k == FuncKind::Argmin; }
constexpr bool is_aggregate(FuncKind k) {
  return k == FuncKind::Max || k == FuncKind::Min || k == FuncKind::Sum || k == FuncKind::Average;
}
constexpr bool is_pairwise(FuncKind k) {
  return k == FuncKind::Difference || k == FuncKind::Proportion || k == FuncKind::ProportionRev ||
         k == FuncKind::DifferenceRate || k == FuncKind::DifferenceRateRev;
}
constexpr bool is_order_filter(FuncKind k) {
  return k == FuncKind::GreaterThan || k == FuncKind::GreaterEqThan || k == FuncKind::LessThan ||
         k == FuncKind::LessEqThan || k == FuncKind::Eq || k == FuncKind::NotEq;
}
constexpr bool takes_level(FuncKind k) { return k == FuncKind::FilterLevel || is_aggregate(k) || k == FuncKind::Count; }

struct Level {
  Side side = Side::Left;
  int depth = 1;
  friend bool operator==(const Level&, const Level&) = default;
};

inline std::string render_level(Level l) { return std::string(to_string(l.side)) + "_" + std::to_string(l.depth); }

struct Func {
  FuncKind kind = FuncKind::FilterLevel;
  std::vector<std::string> headers;  // FilterTree only: 1 or 2 header strings
  Level level;                       // FilterLevel, aggregates, count
  int k = 1;                         // superlatives
  double n = 0.0;                    // order filters

  friend bool operator==(const Func&, const Func&) = default;
};

struct Program {
  std::vector<Func> funcs;
  friend bool operator==(const Program&, const Program&) = default;
};

// Side each filter_tree addresses, fixed by the grammar: trees before the LEFT
// filter_level are left headers, the rest are top headers.
inline std::vector<std::optional<Side>> filter_sides(const Program& p) {
  std::vector<std::optional<Side>> out(p.funcs.size());
  bool passed_left_level = false;
  bool has_left_level = std::any_of(p.funcs.begin(), p.funcs.end(), [](const Func& f) {
    return f.kind == FuncKind::FilterLevel && f.level.side == Side::Left;
  });
  for (std::size_t i = 0; i < p.funcs.size(); ++i) {
    const auto& f = p.funcs[i];
    if (f.kind == FuncKind::FilterLevel && f.level.side == Side::Left) passed_left_level = true;
    if (f.kind == FuncKind::FilterTree) out[i] = (has_left_level && !passed_left_level) ? Side::Left : Side::Top;
  }
  return out;
}

// Shape rules checkable without a table. Throws GrammarViolation.
inline void validate_grammar(const Program& p) {
  auto violation = [](const std::string& what) { fail(ErrorCode::GrammarViolation, what); };
  // Phase 0: left trees, 1: after LEFT level, 2: after TOP level, 3: after operator.
  int phase = 0;
  bool pending_trees = false;
  for (std::size_t i = 0; i < p.funcs.size(); ++i) {
    const auto& f = p.funcs[i];
    if (phase == 3) violation("nothing may follow the region operator " + std::string(to_string(p.funcs[i - 1].kind)));
    switch (f.kind) {
      case FuncKind::FilterTree:
        if (f.headers.empty() || f.headers.size() > 2) violation("filter_tree takes one or two headers");
        if (phase == 2) violation("filter_tree after the TOP filter_level");
        pending_trees = true;
        break;
      case FuncKind::FilterLevel:
        if (f.level.depth < 1) violation("level depth must be at least 1");
        if (f.level.side == Side::Left) {
          if (phase >= 1) violation("second LEFT filter_level or LEFT level after TOP filtering");
          phase = 1;
        } else {
          if (phase >= 2) violation("second TOP filter_level");
          phase = 2;
        }
        pending_trees = false;
        break;
      default:
        if (pending_trees) violation("filter_tree must be followed by a filter_level before an operator");
        if (takes_level(f.kind) && f.level.depth < 1) violation("level depth must be at least 1");
        if (is_superlative(f.kind) && f.k < 1) violation("superlative rank must be at least 1");
        if (is_order_filter(f.kind) && !std::isfinite(f.n)) violation("order filter needs a finite number");
        phase = 3;
        break;
    }
  }
  if (pending_trees) violation("filter_tree must be followed by a filter_level");
}

namespace detail {

inline bool needs_quotes(std::string_view s) {
  if (s.empty()) return true;
  for (char c : s) {
    if (text::is_space(c) || c == '(' || c == ')' || c == '"' || c == '\\') return true;
  }
  return false;
}

inline std::string quote_header(std::string_view s) {
  if (!needs_quotes(s)) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

struct SexpToken {
  std::string text;
  bool quoted = false;
};

class ProgramLexer {
 public:
  explicit ProgramLexer(std::string_view s) : s_(s) {}

  // Next parenthesized call as its atoms, or nullopt at end of input.
  std::optional<std::vector<SexpToken>> next_call() {
    skip_ws();
    if (pos_ >= s_.size()) return std::nullopt;
    if (s_[pos_] != '(') error("'('");
    ++pos_;
    std::vector<SexpToken> atoms;
    for (;;) {
      skip_ws();
      if (pos_ >= s_.size()) error("')'");
      const char c = s_[pos_];
      if (c == ')') {
        ++pos_;
        break;
      }
      if (c == '(') error("an atom (nested calls are not part of the language)");
      atoms.push_back(c == '"' ? quoted() : bare());
    }
    if (atoms.empty() || atoms.front().quoted) error("a function name");
    return atoms;
  }

 private:
  [[noreturn]] void error(std::string_view expected) const {
    fail(ErrorCode::SyntaxError, "at position " + std::to_string(pos_) + ": expected " + std::string(expected));
  }

  void skip_ws() {
    while (pos_ < s_.size() && text::is_space(s_[pos_])) ++pos_;
  }

  SexpToken quoted() {
    ++pos_;
    SexpToken t{"", true};
    for (;;) {
      if (pos_ >= s_.size()) error("closing '\"'");
      char c = s_[pos_++];
      if (c == '"') return t;
      if (c == '\\') {
        if (pos_ >= s_.size()) error("escaped character");
        c = s_[pos_++];
      }
      t.text.push_back(c);
    }
  }

  SexpToken bare() {
    SexpToken t;
    while (pos_ < s_.size() && !text::is_space(s_[pos_]) && s_[pos_] != '(' && s_[pos_] != ')' && s_[pos_] != '"') {
      t.text.push_back(s_[pos_++]);
    }
    return t;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

inline std::optional<Level> parse_level_token(std::string_view tok) {
  const auto lower = text::to_lower(tok);
  Side side;
  std::string_view rest;
  if (lower.rfind("left_", 0) == 0) {
    side = Side::Left;
    rest = std::string_view(lower).substr(5);
  } else if (lower.rfind("top_", 0) == 0) {
    side = Side::Top;
    rest = std::string_view(lower).substr(4);
  } else {
    return std::nullopt;
  }
  if (rest.empty() || rest.size() > 3 || !std::all_of(rest.begin(), rest.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  int depth = 0;
  for (char c : rest) depth = depth * 10 + (c - '0');
  return Level{side, depth};
}

}  // namespace detail

inline Program parse_program(std::string_view text) {
  Program program;
  detail::ProgramLexer lexer(text);
  while (auto call = lexer.next_call()) {
    const auto& atoms = *call;
    const auto& name = atoms.front().text;
    const auto kind = parse_func_kind(name);
    if (!kind) fail(ErrorCode::UnknownFunction, "unknown function '" + name + "'");
    const std::size_t nargs = atoms.size() - 1;
    auto arity = [&](std::size_t lo, std::size_t hi) {
      if (nargs < lo || nargs > hi) {
        fail(ErrorCode::SyntaxError, name + " takes " + std::to_string(lo) +
                                         (lo == hi ? "" : "-" + std::to_string(hi)) + " argument(s), got " +
                                         std::to_string(nargs));
      }
    };
    Func f;
    f.kind = *kind;
    if (*kind == FuncKind::FilterTree) {
      arity(1, 2);
      for (std::size_t i = 1; i < atoms.size(); ++i) f.headers.push_back(atoms[i].text);
    } else if (takes_level(*kind)) {
      arity(1, 1);
      const auto level = atoms[1].quoted ? std::nullopt : detail::parse_level_token(atoms[1].text);
      if (!level) fail(ErrorCode::SyntaxError, name + " expects a level like LEFT_2, got '" + atoms[1].text + "'");
      f.level = *level;
    } else if (is_superlative(*kind)) {
      arity(0, 1);
      if (nargs == 1) {
        double k = 0.0;
        if (atoms[1].quoted || !text::parse_decimal(atoms[1].text, k) || k < 1 || std::floor(k) != k || k > 1e6) {
          fail(ErrorCode::SyntaxError, name + " expects a positive integer rank, got '" + atoms[1].text + "'");
        }
        f.k = static_cast<int>(k);
      }
    } else if (is_order_filter(*kind)) {
      arity(1, 1);
      if (atoms[1].quoted || !text::parse_decimal(atoms[1].text, f.n)) {
        fail(ErrorCode::SyntaxError, name + " expects a number, got '" + atoms[1].text + "'");
      }
    } else {
      arity(0, 0);
    }
    program.funcs.push_back(std::move(f));
  }
  validate_grammar(program);
  return program;
}

inline std::string render_func(const Func& f) {
  std::string out = "(" + std::string(to_string(f.kind));
  if (f.kind == FuncKind::FilterTree) {
    for (const auto& h : f.headers) out += " " + detail::quote_header(h);
  } else if (takes_level(f.kind)) {
    out += " " + render_level(f.level);
  } else if (is_superlative(f.kind)) {
    out += " " + std::to_string(f.k);
  } else if (is_order_filter(f.kind)) {
    out += " " + text::format_number(f.n);
  }
  return out + ")";
}

inline std::string render_program(const Program& p) {
  std::string out;
  for (std::size_t i = 0; i < p.funcs.size(); ++i) {
    if (i) out += " ";
    out += render_func(p.funcs[i]);
  }
  return out;
}

inline std::optional<FuncKind> region_operator(const Program& p) {
  if (!p.funcs.empty() && is_region_op(p.funcs.back().kind)) return p.funcs.back().kind;
  return std::nullopt;
}

// A program whose filter_tree arguments are resolved to header nodes.
struct BoundFunc {
  Func func;
  std::vector<NodeRef> nodes;  // FilterTree only, parallel to func.headers
  friend bool operator==(const BoundFunc&, const BoundFunc&) = default;
};

struct BoundProgram {
  std::vector<BoundFunc> funcs;
  friend bool operator==(const BoundProgram&, const BoundProgram&) = default;
};

// Surface program of a binding, with header strings taken from the nodes.
inline Program unbind(const BoundProgram& bp, const HierTable& table) {
  Program p;
  for (const auto& bf : bp.funcs) {
    Func f = bf.func;
    if (f.kind == FuncKind::FilterTree) {
      f.headers.clear();
      for (auto ref : bf.nodes) f.headers.push_back(table.node(ref).text);
    }
    p.funcs.push_back(std::move(f));
  }
  return p;
}

inline constexpr std::size_t kMaxBindings = 4096;

// Every assignment of header strings to same-named nodes on the side the
// grammar dictates, in document order of the choices. A filter_tree never
// binds the same node twice.
inline std::vector<BoundProgram> bind_program(const Program& p, const HierTable& table) {
  validate_grammar(p);
  const auto sides = filter_sides(p);
  std::vector<std::vector<std::vector<NodeRef>>> choices(p.funcs.size());
  for (std::size_t i = 0; i < p.funcs.size(); ++i) {
    if (!sides[i]) continue;
    for (const auto& h : p.funcs[i].headers) {
      const auto side = *sides[i] == Side::Left ? LookupSide::Left : LookupSide::Top;
      auto nodes = lookup_nodes(table, h, side);
      if (nodes.empty()) {
        const auto other = lookup_nodes(table, h, side == LookupSide::Left ? LookupSide::Top : LookupSide::Left);
        if (!other.empty()) {
          fail(ErrorCode::GrammarViolation, "header '" + h + "' is a " + std::string(to_string(other.front().side)) +
                                                " header but its position requires " +
                                                std::string(to_string(*sides[i])));
        }
        fail(ErrorCode::UnresolvedHeader, "no header matches '" + h + "'");
      }
      choices[i].push_back(std::move(nodes));
    }
  }
  std::vector<BoundProgram> out;
  BoundProgram cur;
  cur.funcs.resize(p.funcs.size());
  auto rec = [&](auto&& self, std::size_t fi, std::size_t hi) -> void {
    if (out.size() >= kMaxBindings) return;
    if (fi == p.funcs.size()) {
      out.push_back(cur);
      return;
    }
    auto& bf = cur.funcs[fi];
    if (hi == 0) {
      bf.func = p.funcs[fi];
      bf.nodes.clear();
    }
    if (hi == choices[fi].size()) {
      self(self, fi + 1, 0);
      return;
    }
    for (auto ref : choices[fi][hi]) {
      if (std::find(bf.nodes.begin(), bf.nodes.end(), ref) != bf.nodes.end()) continue;
      bf.nodes.push_back(ref);
      self(self, fi, hi + 1);
      bf.nodes.pop_back();
    }
  };
  rec(rec, 0, 0);
  if (out.empty()) fail(ErrorCode::UnresolvedHeader, "filter_tree names the same header twice");
  return out;
}

}  // namespace hitab
