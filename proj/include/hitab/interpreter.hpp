#pragma once

// Two-phase execution: selection calls narrow a region of the data grid, then
// an optional region operator computes the answer from it.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hitab/logical_form.hpp"

namespace hitab {

struct RegionVal {
  Region region;
  friend bool operator==(const RegionVal&, const RegionVal&) = default;
};

struct NumberVal {
  double value = 0.0;
  friend bool operator==(const NumberVal&, const NumberVal&) = default;
};

// Non-empty; ties give several entries.
struct HeaderListVal {
  std::vector<NodeRef> nodes;
  std::vector<std::string> headers;
  friend bool operator==(const HeaderListVal&, const HeaderListVal&) = default;
};

// Group header string -> aggregate, in first-appearance order; keys unique.
struct GroupedVal {
  std::vector<std::pair<std::string, double>> entries;
  friend bool operator==(const GroupedVal&, const GroupedVal&) = default;
};

using ExecValue = std::variant<RegionVal, NumberVal, HeaderListVal, GroupedVal>;

namespace detail {

inline std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline const CellValue& region_value(const HierTable& t, int row, int col) { return t.data_cell(row, col).value; }

// Indices along the varying axis of a one-row or one-column region, with the
// side they belong to. A single cell varies along the left axis.
inline Side varying_side(const Region& r) {
  if (r.rows.size() > 1) return Side::Left;
  if (r.cols.size() > 1) return Side::Top;
  return Side::Left;
}

inline void require_line(const Region& r, std::string_view op) {
  if (r.rows.empty() || r.cols.empty() || (r.rows.size() != 1 && r.cols.size() != 1)) {
    fail(ErrorCode::ShapeError, std::string(op) + " needs one row or one column of data, got " +
                                    std::to_string(r.rows.size()) + "x" + std::to_string(r.cols.size()));
  }
}

inline const CellValue& line_value(const HierTable& t, const Region& r, Side side, int idx) {
  return side == Side::Left ? region_value(t, idx, r.cols.front()) : region_value(t, r.rows.front(), idx);
}

inline HeaderListVal header_list(const HierTable& t, Side side, const std::vector<int>& indices) {
  HeaderListVal out;
  for (int idx : indices) {
    const NodeRef ref{side, t.tree(side).owner(idx)};
    if (std::find(out.nodes.begin(), out.nodes.end(), ref) != out.nodes.end()) continue;
    out.nodes.push_back(ref);
    out.headers.push_back(t.node(ref).text);
  }
  return out;
}

}  // namespace detail

inline Region exec_filter_tree(const HierTable& t, const Region& region, std::span<const NodeRef> headers) {
  if (headers.empty() || headers.size() > 2) fail(ErrorCode::GrammarViolation, "filter_tree takes one or two headers");
  const Side side = headers.front().side;
  for (auto h : headers) {
    if (h.side != side) fail(ErrorCode::MixedSides, "filter_tree headers on both LEFT and TOP");
  }
  const auto& axis = region.axis(side);
  std::vector<int> kept;
  for (auto h : headers) {
    const auto span = t.node(h).span;
    bool any = false;
    for (int idx : axis) {
      if (span.contains(idx)) kept.push_back(idx), any = true;
    }
    if (!any) fail(ErrorCode::EmptySelection, "header '" + t.node(h).text + "' indexes nothing in the region");
  }
  Region out = region;
  out.axis(side) = detail::sorted_unique(std::move(kept));
  if (headers.size() == 2) out.last_filter_order.assign(headers.begin(), headers.end());
  return out;
}

inline Region exec_filter_level(const HierTable& t, const Region& region, Level level) {
  if (level.depth < 1) fail(ErrorCode::GrammarViolation, "level depth must be at least 1");
  const auto& tree = t.tree(level.side);
  Region out = region;
  auto& axis = out.axis(level.side);
  std::erase_if(axis, [&](int idx) { return tree.node(tree.owner(idx)).depth != level.depth; });
  if (axis.empty()) {
    fail(ErrorCode::EmptySelection, "no " + render_level(level) + " headers index the region");
  }
  return out;
}

// Header(s) of the cells holding the k-th largest (argmax) or smallest value;
// ranks are dense over distinct values.
inline HeaderListVal exec_superlative(const HierTable& t, const Region& region, FuncKind kind, int k) {
  detail::require_line(region, to_string(kind));
  const Side side = detail::varying_side(region);
  std::vector<double> values;
  for (int idx : region.axis(side)) {
    const auto& v = detail::line_value(t, region, side, idx);
    if (v.is_number()) values.push_back(v.as_number());
  }
  if (values.empty()) fail(ErrorCode::NoNumericData, std::string(to_string(kind)) + " over a region with no numbers");
  if (kind == FuncKind::Argmax) {
    std::sort(values.begin(), values.end(), std::greater<>());
  } else {
    std::sort(values.begin(), values.end());
  }
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (k < 1 || static_cast<std::size_t>(k) > values.size()) {
    fail(ErrorCode::RankOutOfRange, "rank " + std::to_string(k) + " but only " + std::to_string(values.size()) +
                                        " distinct values");
  }
  const double target = values[static_cast<std::size_t>(k - 1)];
  std::vector<int> hits;
  for (int idx : region.axis(side)) {
    const auto& v = detail::line_value(t, region, side, idx);
    if (v.is_number() && v.as_number() == target) hits.push_back(idx);
  }
  return detail::header_list(t, side, hits);
}

inline GroupedVal exec_aggregate(const HierTable& t, const Region& region, FuncKind kind, Level level) {
  const Side side = level.side;
  const auto& other = region.axis(side == Side::Left ? Side::Top : Side::Left);
  if (other.size() != 1) {
    fail(ErrorCode::ShapeError, std::string(to_string(kind)) + " over " + render_level(level) +
                                    " needs a single opposite " + (side == Side::Left ? "column" : "row"));
  }
  const auto& tree = t.tree(side);
  struct Group {
    std::string key;
    std::vector<double> values;
  };
  std::vector<Group> groups;
  for (int idx : region.axis(side)) {
    const auto anc = tree.ancestor_at_depth(tree.owner(idx), level.depth);
    if (!anc) {
      fail(ErrorCode::LevelUnreachable, "index " + std::to_string(idx) + " has no " + render_level(level) + " header");
    }
    const auto& key = tree.node(*anc).text;
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) { return g.key == key; });
    if (it == groups.end()) {
      groups.push_back({key, {}});
      it = std::prev(groups.end());
    }
    const auto& v = side == Side::Left ? detail::region_value(t, idx, other.front())
                                       : detail::region_value(t, other.front(), idx);
    if (v.is_number()) it->values.push_back(v.as_number());
  }
  GroupedVal out;
  for (const auto& g : groups) {
    if (g.values.empty()) fail(ErrorCode::EmptyAggregate, "group '" + g.key + "' has no numeric cell");
    double acc = 0.0;
    switch (kind) {
      case FuncKind::Max: acc = *std::max_element(g.values.begin(), g.values.end()); break;
      case FuncKind::Min: acc = *std::min_element(g.values.begin(), g.values.end()); break;
      case FuncKind::Sum:
      case FuncKind::Average:
        for (double x : g.values) acc += x;
        if (kind == FuncKind::Average) acc /= static_cast<double>(g.values.size());
        break;
      default: fail(ErrorCode::GrammarViolation, std::string(to_string(kind)) + " is not an aggregate");
    }
    out.entries.emplace_back(g.key, acc);
  }
  return out;
}

// Distinct depth-level nodes above (or at) the region's indices on the
// level's side; indices owned by shallower headers are not counted.
inline NumberVal exec_count(const HierTable& t, const Region& region, Level level) {
  const auto& tree = t.tree(level.side);
  std::set<int> nodes;
  for (int idx : region.axis(level.side)) {
    if (auto anc = tree.ancestor_at_depth(tree.owner(idx), level.depth)) nodes.insert(*anc);
  }
  if (nodes.empty()) fail(ErrorCode::LevelUnreachable, "no " + render_level(level) + " headers index the region");
  return {static_cast<double>(nodes.size())};
}

inline NumberVal exec_pairwise(const HierTable& t, const Region& region, FuncKind kind) {
  if (region.cell_count() != 2) {
    fail(ErrorCode::ShapeError, std::string(to_string(kind)) + " needs two cells, got " +
                                    std::to_string(region.cell_count()));
  }
  std::vector<std::pair<int, int>> cells;
  for (int r : region.rows) {
    for (int c : region.cols) cells.emplace_back(r, c);
  }
  std::size_t ai = 0;
  if (!region.last_filter_order.empty()) {
    const auto first = region.last_filter_order.front();
    const auto span = t.node(first).span;
    std::vector<std::size_t> inside;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const int idx = first.side == Side::Left ? cells[i].first : cells[i].second;
      if (span.contains(idx)) inside.push_back(i);
    }
    if (inside.size() == 1) ai = inside.front();
  }
  const auto& va = detail::region_value(t, cells[ai].first, cells[ai].second);
  const auto& vb = detail::region_value(t, cells[1 - ai].first, cells[1 - ai].second);
  if (!va.is_number() || !vb.is_number()) {
    fail(ErrorCode::NoNumericData, std::string(to_string(kind)) + " needs two numeric cells");
  }
  const double a = va.as_number(), b = vb.as_number();
  auto divide = [](double num, double den) {
    if (den == 0.0) fail(ErrorCode::DivisionByZero, "division by zero");
    return num / den;
  };
  switch (kind) {
    case FuncKind::Difference: return {std::abs(a - b)};
    case FuncKind::Proportion: return {divide(b, a)};
    case FuncKind::ProportionRev: return {divide(a, b)};
    case FuncKind::DifferenceRate: return {divide(a - b, b)};
    case FuncKind::DifferenceRateRev: return {divide(b - a, a)};
    default: fail(ErrorCode::GrammarViolation, std::string(to_string(kind)) + " is not a pairwise operator");
  }
}

inline constexpr double kOrderTolerance = 1e-9;

inline HeaderListVal exec_order_filter(const HierTable& t, const Region& region, FuncKind kind, double n) {
  detail::require_line(region, to_string(kind));
  const Side side = detail::varying_side(region);
  std::vector<int> hits;
  bool any_numeric = false;
  for (int idx : region.axis(side)) {
    const auto& v = detail::line_value(t, region, side, idx);
    if (!v.is_number()) continue;
    any_numeric = true;
    const double x = v.as_number();
    bool keep = false;
    switch (kind) {
      case FuncKind::GreaterThan: keep = x > n; break;
      case FuncKind::GreaterEqThan: keep = x >= n; break;
      case FuncKind::LessThan: keep = x < n; break;
      case FuncKind::LessEqThan: keep = x <= n; break;
      case FuncKind::Eq: keep = std::abs(x - n) <= kOrderTolerance; break;
      case FuncKind::NotEq: keep = std::abs(x - n) > kOrderTolerance; break;
      default: fail(ErrorCode::GrammarViolation, std::string(to_string(kind)) + " is not an order filter");
    }
    if (keep) hits.push_back(idx);
  }
  if (!any_numeric) fail(ErrorCode::NoNumericData, std::string(to_string(kind)) + " over a region with no numbers");
  if (hits.empty()) {
    fail(ErrorCode::EmptySelection, "no cell satisfies " + std::string(to_string(kind)) + " " + text::format_number(n));
  }
  return detail::header_list(t, side, hits);
}

inline NumberVal exec_opposite(const HierTable& t, const Region& region) {
  if (region.cell_count() != 1) {
    fail(ErrorCode::ShapeError, "opposite needs one cell, got " + std::to_string(region.cell_count()));
  }
  const auto& v = detail::region_value(t, region.rows.front(), region.cols.front());
  if (!v.is_number()) fail(ErrorCode::NoNumericData, "opposite of a non-numeric cell");
  return {v.as_number() == 0.0 ? 0.0 : -v.as_number()};
}

struct ExecTrace {
  std::vector<Region> regions;  // after each selection call; front() is the full region
  Region selected;              // input region of the operator (or the final region)
  std::optional<FuncKind> op;
  std::vector<NodeRef> filtered_nodes;  // every node used by a filter_tree, in order
};

inline ExecValue apply_operator(const HierTable& t, const Region& r, const Func& f) {
  if (is_superlative(f.kind)) return exec_superlative(t, r, f.kind, f.k);
  if (is_aggregate(f.kind)) return exec_aggregate(t, r, f.kind, f.level);
  if (f.kind == FuncKind::Count) return exec_count(t, r, f.level);
  if (is_pairwise(f.kind)) return exec_pairwise(t, r, f.kind);
  if (is_order_filter(f.kind)) return exec_order_filter(t, r, f.kind, f.n);
  if (f.kind == FuncKind::Opposite) return exec_opposite(t, r);
  fail(ErrorCode::GrammarViolation, std::string(to_string(f.kind)) + " is not a region operator");
}

inline ExecValue execute_traced(const BoundProgram& program, const HierTable& t, ExecTrace* trace) {
  Region region = full_region(t);
  if (trace) *trace = ExecTrace{{region}, {}, std::nullopt, {}};
  for (std::size_t i = 0; i < program.funcs.size(); ++i) {
    const auto& bf = program.funcs[i];
    const auto& f = bf.func;
    if (f.kind == FuncKind::FilterTree) {
      region = exec_filter_tree(t, region, bf.nodes);
      if (trace) trace->filtered_nodes.insert(trace->filtered_nodes.end(), bf.nodes.begin(), bf.nodes.end());
    } else if (f.kind == FuncKind::FilterLevel) {
      region = exec_filter_level(t, region, f.level);
    } else {
      if (i + 1 != program.funcs.size()) fail(ErrorCode::GrammarViolation, "region operator must be last");
      if (trace) {
        trace->selected = region;
        trace->op = f.kind;
      }
      return apply_operator(t, region, f);
    }
    if (trace) trace->regions.push_back(region);
  }
  if (trace) trace->selected = region;
  return RegionVal{region};
}

inline ExecValue execute(const BoundProgram& program, const HierTable& t) { return execute_traced(program, t, nullptr); }

// Question-context preference for a binding: how many ancestors of its bound
// nodes have text occurring in the question as a whole-token phrase.
inline int binding_context_score(const BoundProgram& bp, const HierTable& t, std::string_view question) {
  if (question.empty()) return 0;
  const auto tokens = text::word_tokens(question);
  const std::string padded = " " + text::join(tokens, " ") + " ";
  int score = 0;
  for (const auto& bf : bp.funcs) {
    for (auto ref : bf.nodes) {
      const auto& tree = t.tree(ref.side);
      for (int cur = tree.node(ref.id).parent; cur > 0; cur = tree.node(cur).parent) {
        const auto phrase = text::join(text::word_tokens(tree.node(cur).text), " ");
        if (!phrase.empty() && padded.find(" " + phrase + " ") != std::string::npos) ++score;
      }
    }
  }
  return score;
}

// Executes the first binding that succeeds, trying bindings whose ancestors
// are named in the question first, then document order. Errors of the
// preferred binding propagate when none succeeds.
inline ExecValue execute(const Program& program, const HierTable& t, std::string_view question = {},
                         ExecTrace* trace = nullptr, BoundProgram* chosen = nullptr) {
  auto bindings = bind_program(program, t);
  std::vector<int> scores;
  scores.reserve(bindings.size());
  for (const auto& b : bindings) scores.push_back(binding_context_score(b, t, question));
  std::vector<std::size_t> order(bindings.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::optional<Error> first_error;
  for (auto i : order) {
    try {
      auto value = execute_traced(bindings[i], t, trace);
      if (chosen) *chosen = bindings[i];
      return value;
    } catch (const Error& e) {
      if (!first_error) first_error = e;
    }
  }
  throw *first_error;
}

// Answer-comparable values: a region gives its cells row-major, a header list
// its header strings, a grouping its values in key order.
inline std::vector<CellValue> answer_values(const ExecValue& v, const HierTable& t) {
  std::vector<CellValue> out;
  if (const auto* r = std::get_if<RegionVal>(&v)) {
    for (int row : r->region.rows) {
      for (int col : r->region.cols) out.push_back(detail::region_value(t, row, col));
    }
  } else if (const auto* n = std::get_if<NumberVal>(&v)) {
    out.push_back(CellValue::number(n->value));
  } else if (const auto* h = std::get_if<HeaderListVal>(&v)) {
    for (const auto& s : h->headers) out.push_back(CellValue::text(s));
  } else if (const auto* g = std::get_if<GroupedVal>(&v)) {
    for (const auto& [key, value] : g->entries) out.push_back(CellValue::number(value));
  }
  return out;
}

inline std::string render_exec_value(const ExecValue& v, const HierTable& t) {
  if (const auto* g = std::get_if<GroupedVal>(&v)) {
    std::string out = "{";
    for (std::size_t i = 0; i < g->entries.size(); ++i) {
      if (i) out += ", ";
      out += g->entries[i].first + ": " + text::format_number(g->entries[i].second);
    }
    return out + "}";
  }
  std::vector<std::string> parts;
  for (const auto& c : answer_values(v, t)) parts.push_back(c.render());
  if (parts.size() == 1) return parts.front();
  return "[" + text::join(parts, ", ") + "]";
}

}  // namespace hitab
