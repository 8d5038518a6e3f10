#pragma once

// Brute-force evaluator for bound programs. It works from the generator's own
// tree description and keeps the selection as an explicit set of data cells;
// nothing here calls into the interpreter.

#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "support/random_case.hpp"

namespace hitab::testing {

struct OracleNode {
  int parent = -1;
  int depth = 0;
  std::string text;
  std::set<int> subtree;  // every data index at or below this node
};

struct OracleTree {
  std::vector<OracleNode> nodes;
  std::map<int, int> owner;  // data index -> node id

  static OracleTree from(const GenNode& root) {
    OracleTree t;
    t.add(root, -1, 0);
    return t;
  }

  std::optional<int> ancestor(int id, int depth) const {
    for (int cur = id; cur >= 0; cur = nodes[cur].parent) {
      if (nodes[cur].depth == depth) return cur;
    }
    return std::nullopt;
  }

 private:
  int add(const GenNode& g, int parent, int depth) {
    const int id = static_cast<int>(nodes.size());
    nodes.push_back({parent, depth, g.text, {}});
    for (int i : g.own) {
      owner[i] = id;
      nodes[id].subtree.insert(i);
    }
    for (const auto& c : g.children) {
      const int cid = add(c, id, depth + 1);
      nodes[id].subtree.insert(nodes[cid].subtree.begin(), nodes[cid].subtree.end());
    }
    return id;
  }
};

struct OracleValue {
  enum Kind { Cells, Number, Headers, Grouped } kind = Cells;
  std::set<std::pair<int, int>> cells;
  double number = 0.0;
  std::vector<std::pair<int, int>> headers;  // (side, node id)
  std::vector<std::pair<std::string, double>> groups;
};

struct OracleOutcome {
  std::optional<ErrorCode> error;
  OracleValue value;
};

class Oracle {
 public:
  explicit Oracle(const RandomCase& rc) : rc_(rc), left_(OracleTree::from(rc.left)), top_(OracleTree::from(rc.top)) {}

  OracleOutcome run(const BoundProgram& bp) const {
    std::set<std::pair<int, int>> cells;
    for (int r = 0; r < rc_.data_rows; ++r) {
      for (int c = 0; c < rc_.data_cols; ++c) cells.insert({r, c});
    }
    std::vector<NodeRef> order;
    for (const auto& bf : bp.funcs) {
      const auto& f = bf.func;
      if (f.kind == FuncKind::FilterTree) {
        std::set<std::pair<int, int>> kept;
        for (auto h : bf.nodes) {
          const auto& sub = tree(h.side).nodes[h.id].subtree;
          bool any = false;
          for (auto cell : cells) {
            if (sub.contains(h.side == Side::Left ? cell.first : cell.second)) kept.insert(cell), any = true;
          }
          if (!any) return err(ErrorCode::EmptySelection);
        }
        cells = kept;
        if (bf.nodes.size() == 2) order = bf.nodes;
      } else if (f.kind == FuncKind::FilterLevel) {
        std::set<std::pair<int, int>> kept;
        const auto& t = tree(f.level.side);
        for (auto cell : cells) {
          const int idx = f.level.side == Side::Left ? cell.first : cell.second;
          if (t.nodes[t.owner.at(idx)].depth == f.level.depth) kept.insert(cell);
        }
        if (kept.empty()) return err(ErrorCode::EmptySelection);
        cells = kept;
      } else {
        return op(f, cells, order);
      }
    }
    OracleOutcome out;
    out.value.cells = cells;
    return out;
  }

 private:
  static OracleOutcome err(ErrorCode c) {
    OracleOutcome o;
    o.error = c;
    return o;
  }

  const OracleTree& tree(Side s) const { return s == Side::Left ? left_ : top_; }

  std::optional<double> num(std::pair<int, int> cell) const {
    const auto& s = rc_.data[cell.first][cell.second];
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (*end != '\0') return std::nullopt;
    return v;
  }

  OracleOutcome op(const Func& f, const std::set<std::pair<int, int>>& cells, const std::vector<NodeRef>& order) const {
    std::set<int> rows, cols;
    for (auto c : cells) rows.insert(c.first), cols.insert(c.second);
    const bool line = rows.size() == 1 || cols.size() == 1;
    const Side vary = rows.size() > 1 ? Side::Left : (cols.size() > 1 ? Side::Top : Side::Left);
    auto vary_idx = [&](std::pair<int, int> c) { return vary == Side::Left ? c.first : c.second; };
    auto headers_of = [&](const std::vector<std::pair<int, int>>& hits) {
      OracleOutcome out;
      out.value.kind = OracleValue::Headers;
      for (auto c : hits) {
        const std::pair<int, int> h{static_cast<int>(vary), tree(vary).owner.at(vary_idx(c))};
        if (std::find(out.value.headers.begin(), out.value.headers.end(), h) == out.value.headers.end()) {
          out.value.headers.push_back(h);
        }
      }
      return out;
    };
    auto number = [](double v) {
      OracleOutcome out;
      out.value.kind = OracleValue::Number;
      out.value.number = v;
      return out;
    };
    std::vector<std::pair<int, int>> ordered(cells.begin(), cells.end());  // row-major

    switch (f.kind) {
      case FuncKind::Argmax:
      case FuncKind::Argmin: {
        if (!line) return err(ErrorCode::ShapeError);
        std::set<double> distinct;
        for (auto c : ordered) {
          if (auto v = num(c)) distinct.insert(*v);
        }
        if (distinct.empty()) return err(ErrorCode::NoNumericData);
        if (static_cast<std::size_t>(f.k) > distinct.size()) return err(ErrorCode::RankOutOfRange);
        std::vector<double> ranked(distinct.begin(), distinct.end());
        if (f.kind == FuncKind::Argmax) std::reverse(ranked.begin(), ranked.end());
        const double target = ranked[f.k - 1];
        std::vector<std::pair<int, int>> hits;
        for (auto c : ordered) {
          if (auto v = num(c); v && *v == target) hits.push_back(c);
        }
        return headers_of(hits);
      }
      case FuncKind::Max:
      case FuncKind::Min:
      case FuncKind::Sum:
      case FuncKind::Average: {
        const auto& other = f.level.side == Side::Left ? cols : rows;
        if (other.size() != 1) return err(ErrorCode::ShapeError);
        const auto& t = tree(f.level.side);
        std::vector<std::pair<std::string, std::vector<double>>> groups;
        for (auto c : ordered) {
          const int idx = f.level.side == Side::Left ? c.first : c.second;
          const auto anc = t.ancestor(t.owner.at(idx), f.level.depth);
          if (!anc) return err(ErrorCode::LevelUnreachable);
          const auto& key = t.nodes[*anc].text;
          auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == key; });
          if (it == groups.end()) it = groups.insert(groups.end(), {key, {}});
          if (auto v = num(c)) it->second.push_back(*v);
        }
        OracleOutcome out;
        out.value.kind = OracleValue::Grouped;
        for (const auto& [key, vals] : groups) {
          if (vals.empty()) return err(ErrorCode::EmptyAggregate);
          double acc = f.kind == FuncKind::Max ? -INFINITY : (f.kind == FuncKind::Min ? INFINITY : 0.0);
          for (double v : vals) {
            if (f.kind == FuncKind::Max) acc = std::max(acc, v);
            else if (f.kind == FuncKind::Min) acc = std::min(acc, v);
            else acc += v;
          }
          if (f.kind == FuncKind::Average) acc /= static_cast<double>(vals.size());
          out.value.groups.emplace_back(key, acc);
        }
        return out;
      }
      case FuncKind::Count: {
        const auto& t = tree(f.level.side);
        std::set<int> found;
        for (auto c : ordered) {
          const int idx = f.level.side == Side::Left ? c.first : c.second;
          if (auto anc = t.ancestor(t.owner.at(idx), f.level.depth)) found.insert(*anc);
        }
        if (found.empty()) return err(ErrorCode::LevelUnreachable);
        return number(static_cast<double>(found.size()));
      }
      case FuncKind::Difference:
      case FuncKind::Proportion:
      case FuncKind::ProportionRev:
      case FuncKind::DifferenceRate:
      case FuncKind::DifferenceRateRev: {
        if (ordered.size() != 2) return err(ErrorCode::ShapeError);
        int ai = 0;
        if (!order.empty()) {
          const auto first = order.front();
          const auto& sub = tree(first.side).nodes[first.id].subtree;
          std::vector<int> inside;
          for (int i = 0; i < 2; ++i) {
            if (sub.contains(first.side == Side::Left ? ordered[i].first : ordered[i].second)) inside.push_back(i);
          }
          if (inside.size() == 1) ai = inside.front();
        }
        const auto a = num(ordered[ai]);
        const auto b = num(ordered[1 - ai]);
        if (!a || !b) return err(ErrorCode::NoNumericData);
        double numer = 0, denom = 1;
        switch (f.kind) {
          case FuncKind::Difference: return number(std::abs(*a - *b));
          case FuncKind::Proportion: numer = *b, denom = *a; break;
          case FuncKind::ProportionRev: numer = *a, denom = *b; break;
          case FuncKind::DifferenceRate: numer = *a - *b, denom = *b; break;
          default: numer = *b - *a, denom = *a; break;
        }
        if (denom == 0.0) return err(ErrorCode::DivisionByZero);
        return number(numer / denom);
      }
      case FuncKind::GreaterThan:
      case FuncKind::GreaterEqThan:
      case FuncKind::LessThan:
      case FuncKind::LessEqThan:
      case FuncKind::Eq:
      case FuncKind::NotEq: {
        if (!line) return err(ErrorCode::ShapeError);
        bool any = false;
        std::vector<std::pair<int, int>> hits;
        for (auto c : ordered) {
          const auto v = num(c);
          if (!v) continue;
          any = true;
          const double x = *v, n = f.n;
          const bool keep = f.kind == FuncKind::GreaterThan     ? x > n
                            : f.kind == FuncKind::GreaterEqThan ? x >= n
                            : f.kind == FuncKind::LessThan      ? x < n
                            : f.kind == FuncKind::LessEqThan    ? x <= n
                            : f.kind == FuncKind::Eq            ? std::abs(x - n) <= 1e-9
                                                                : std::abs(x - n) > 1e-9;
          if (keep) hits.push_back(c);
        }
        if (!any) return err(ErrorCode::NoNumericData);
        if (hits.empty()) return err(ErrorCode::EmptySelection);
        return headers_of(hits);
      }
      case FuncKind::Opposite: {
        if (ordered.size() != 1) return err(ErrorCode::ShapeError);
        const auto v = num(ordered.front());
        if (!v) return err(ErrorCode::NoNumericData);
        return number(-*v);
      }
      default: return err(ErrorCode::GrammarViolation);
    }
  }

  const RandomCase& rc_;
  OracleTree left_, top_;
};

inline bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::max(std::abs(a), std::abs(b))); }

// Compares an interpreter outcome with the oracle; returns a description of
// the first disagreement, or empty when they agree.
inline std::string compare_with_oracle(const std::optional<ExecValue>& got, std::optional<ErrorCode> got_error,
                                       const OracleOutcome& want) {
  auto code = [](std::optional<ErrorCode> c) { return c ? std::string(to_string(*c)) : std::string("ok"); };
  if (got_error || want.error) {
    if (got_error != want.error) return "error " + code(got_error) + " vs oracle " + code(want.error);
    return {};
  }
  const auto& w = want.value;
  if (const auto* r = std::get_if<RegionVal>(&*got)) {
    if (w.kind != OracleValue::Cells) return "region vs non-region";
    std::set<std::pair<int, int>> cells;
    for (int row : r->region.rows) {
      for (int col : r->region.cols) cells.insert({row, col});
    }
    return cells == w.cells ? "" : "region cells differ";
  }
  if (const auto* n = std::get_if<NumberVal>(&*got)) {
    if (w.kind != OracleValue::Number) return "number vs non-number";
    return close(n->value, w.number) ? "" : "number " + std::to_string(n->value) + " vs " + std::to_string(w.number);
  }
  if (const auto* h = std::get_if<HeaderListVal>(&*got)) {
    if (w.kind != OracleValue::Headers) return "headers vs non-headers";
    std::vector<std::pair<int, int>> refs;
    for (auto ref : h->nodes) refs.push_back({static_cast<int>(ref.side), ref.id});
    return refs == w.headers ? "" : "header lists differ";
  }
  const auto& g = std::get<GroupedVal>(*got);
  if (w.kind != OracleValue::Grouped) return "grouped vs non-grouped";
  if (g.entries.size() != w.groups.size()) return "group counts differ";
  for (std::size_t i = 0; i < g.entries.size(); ++i) {
    if (g.entries[i].first != w.groups[i].first || !close(g.entries[i].second, w.groups[i].second)) {
      return "group '" + g.entries[i].first + "' differs";
    }
  }
  return {};
}

struct OracleCheck {
  std::size_t cases = 0;
  std::size_t agreements = 0;
  std::size_t value_cases = 0;  // cases where both sides produced a value
  std::string first_mismatch;
};

inline OracleCheck run_oracle_cases(std::uint64_t seed, std::size_t n) {
  OracleCheck check;
  CaseGenerator gen(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const auto rc = gen.table();
    const auto table = build_table(rc.input);
    const auto bp = gen.program(table);
    std::optional<ExecValue> got;
    std::optional<ErrorCode> got_error;
    try {
      got = execute(bp, table);
    } catch (const Error& e) {
      got_error = e.code();
    }
    const auto want = Oracle(rc).run(bp);
    ++check.cases;
    const auto diff = compare_with_oracle(got, got_error, want);
    if (diff.empty()) {
      ++check.agreements;
      if (!got_error) ++check.value_cases;
    } else if (check.first_mismatch.empty()) {
      check.first_mismatch = "case " + std::to_string(i) + ": " + render_program(unbind(bp, table)) + ": " + diff;
    }
  }
  return check;
}

}  // namespace hitab::testing
