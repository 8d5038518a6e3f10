#pragma once

// Random hierarchical tables (explicit trees, depth <= 3, grid <= 8x8) and
// random grammar-valid bound programs over them.

#include <random>
#include <string>
#include <vector>

#include "hitab/hitab.hpp"

namespace hitab::testing {

struct GenNode {
  std::string text;
  std::vector<int> own;
  std::vector<GenNode> children;
};

struct RandomCase {
  TableInput input;
  GenNode left;  // virtual roots
  GenNode top;
  int data_rows = 0;
  int data_cols = 0;
  std::vector<std::vector<std::string>> data;  // [data_row][data_col] raw text
};

class CaseGenerator {
 public:
  explicit CaseGenerator(std::uint64_t seed) : rng_(seed) {}

  RandomCase table() {
    RandomCase rc;
    const int left_depth_cap = uniform(1, 3);
    const int top_depth_cap = uniform(1, 3);
    rc.data_rows = uniform(1, 8 - top_depth_cap);
    rc.left.children = segments(0, rc.data_rows - 1, 1, left_depth_cap);
    const int left_depth = depth_of(rc.left) - 1;
    rc.data_cols = uniform(1, 8 - left_depth);
    rc.top.children = segments(0, rc.data_cols - 1, 1, top_depth_cap);
    const int top_depth = depth_of(rc.top) - 1;

    const int n_rows = top_depth + rc.data_rows;
    const int n_cols = left_depth + rc.data_cols;
    rc.input.table_id = "random";
    rc.input.top_header_rows = top_depth;
    rc.input.left_header_cols = left_depth;
    rc.input.cells.assign(static_cast<std::size_t>(n_rows), std::vector<std::string>(static_cast<std::size_t>(n_cols)));
    rc.data.assign(static_cast<std::size_t>(rc.data_rows), std::vector<std::string>(static_cast<std::size_t>(rc.data_cols)));
    for (int r = 0; r < rc.data_rows; ++r) {
      for (int c = 0; c < rc.data_cols; ++c) {
        rc.data[r][c] = random_value();
        rc.input.cells[top_depth + r][left_depth + c] = rc.data[r][c];
      }
    }
    rc.input.left_tree = place(rc.left, Side::Left, rc.input, 0);
    rc.input.top_tree = place(rc.top, Side::Top, rc.input, 0);
    return rc;
  }

  // Grammar-valid by construction: left trees then LEFT level, top trees then
  // TOP level, then at most one operator; at most 6 calls.
  BoundProgram program(const HierTable& t) {
    for (;;) {
      BoundProgram bp;
      phase(bp, t, Side::Left);
      phase(bp, t, Side::Top);
      if (uniform(0, 9) < 7) bp.funcs.push_back(random_operator(t));
      if (bp.funcs.size() <= 6) return bp;
    }
  }

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

 private:
  static int depth_of(const GenNode& n) {
    int d = 0;
    for (const auto& c : n.children) d = std::max(d, depth_of(c));
    return d + 1;
  }

  std::string random_text() {
    static const char* vocab[] = {"a", "b", "c", "d", "total"};
    return vocab[uniform(0, 4)];
  }

  std::string random_value() {
    const int roll = uniform(0, 99);
    if (roll < 8) return "";
    if (roll < 12) return "x";
    if (roll < 80) return std::to_string(uniform(0, 9));
    return std::to_string(uniform(0, 20)) + "." + std::to_string(uniform(1, 9));
  }

  GenNode make_node(int lo, int hi, int depth, int cap) {
    GenNode n;
    n.text = random_text();
    const bool leaf = depth == cap || (lo == hi && uniform(0, 9) < 7) || uniform(0, 3) == 0;
    if (leaf) {
      for (int i = lo; i <= hi; ++i) n.own.push_back(i);
      return n;
    }
    if (hi > lo && uniform(0, 4) < 2) {
      n.own.push_back(lo);
      n.children = segments(lo + 1, hi, depth + 1, cap);
    } else {
      n.children = segments(lo, hi, depth + 1, cap);
    }
    return n;
  }

  std::vector<GenNode> segments(int lo, int hi, int depth, int cap) {
    std::vector<GenNode> out;
    int start = lo;
    for (int i = lo; i <= hi; ++i) {
      if (i == hi || uniform(0, 1) == 0) {
        out.push_back(make_node(start, i, depth, cap));
        start = i + 1;
      }
    }
    return out;
  }

  static int span_lo(const GenNode& n) {
    int lo = n.own.empty() ? 1 << 20 : n.own.front();
    for (const auto& c : n.children) lo = std::min(lo, span_lo(c));
    return lo;
  }

  // Header cell of a depth-d node: column d-1 on its first row (left), row
  // d-1 over its first column (top).
  TreeSpec place(const GenNode& n, Side side, TableInput& in, int depth) {
    TreeSpec spec;
    spec.own = n.own;
    if (depth > 0) {
      const int lo = span_lo(n);
      const CellCoord c = side == Side::Left ? CellCoord{in.top_header_rows + lo, depth - 1}
                                             : CellCoord{depth - 1, in.left_header_cols + lo};
      in.cells[c.row][c.col] = n.text;
      spec.cell = c;
    }
    for (const auto& child : n.children) spec.children.push_back(place(child, side, in, depth + 1));
    return spec;
  }

  // Usually a node whose span overlaps every earlier pick on this side, so
  // that chained filters often leave something selected.
  NodeRef random_node(const HierTable& t, Side side, const std::vector<NodeRef>& earlier) {
    const auto& nodes = t.tree(side).nodes();
    std::vector<int> overlapping;
    for (int id = 1; id < static_cast<int>(nodes.size()); ++id) {
      const auto s = nodes[id].span;
      const bool ok = std::all_of(earlier.begin(), earlier.end(), [&](NodeRef e) {
        const auto o = t.node(e).span;
        return s.lo <= o.hi && o.lo <= s.hi;
      });
      if (ok) overlapping.push_back(id);
    }
    if (!overlapping.empty() && uniform(0, 4) != 0) {
      return {side, overlapping[static_cast<std::size_t>(uniform(0, static_cast<int>(overlapping.size()) - 1))]};
    }
    return {side, uniform(1, static_cast<int>(nodes.size()) - 1)};
  }

  void phase(BoundProgram& bp, const HierTable& t, Side side) {
    const int trees = uniform(0, 2);
    std::vector<NodeRef> used;
    for (int i = 0; i < trees; ++i) {
      BoundFunc bf;
      bf.func.kind = FuncKind::FilterTree;
      const int want = uniform(1, 2);
      for (int j = 0; j < want; ++j) {
        const auto ref = random_node(t, side, j == 0 ? used : std::vector<NodeRef>{});
        if (std::find(bf.nodes.begin(), bf.nodes.end(), ref) != bf.nodes.end()) continue;
        bf.nodes.push_back(ref);
        if (j == 0) used.push_back(ref);
        bf.func.headers.push_back(t.node(ref).text);
      }
      bp.funcs.push_back(std::move(bf));
    }
    if (trees > 0 || uniform(0, 1) == 0) {
      BoundFunc bf;
      bf.func.kind = FuncKind::FilterLevel;
      bf.func.level = random_level(t, side);
      bp.funcs.push_back(std::move(bf));
    }
  }

  // Mostly depths the tree has; occasionally any depth up to 3.
  Level random_level(const HierTable& t, Side side) {
    const int deepest = t.tree(side).max_depth();
    return {side, uniform(0, 6) == 0 ? uniform(1, 3) : uniform(1, deepest)};
  }

  BoundFunc random_operator(const HierTable& t) {
    static constexpr FuncKind ops[] = {
        FuncKind::Argmax,        FuncKind::Argmin,     FuncKind::Max,           FuncKind::Min,
        FuncKind::Sum,           FuncKind::Average,    FuncKind::Count,         FuncKind::Difference,
        FuncKind::Proportion,    FuncKind::ProportionRev, FuncKind::DifferenceRate, FuncKind::DifferenceRateRev,
        FuncKind::GreaterThan,   FuncKind::GreaterEqThan, FuncKind::LessThan,   FuncKind::LessEqThan,
        FuncKind::Eq,            FuncKind::NotEq,      FuncKind::Opposite,
    };
    BoundFunc bf;
    bf.func.kind = ops[uniform(0, 18)];
    bf.func.level = random_level(t, uniform(0, 1) ? Side::Left : Side::Top);
    bf.func.k = uniform(1, 3);
    bf.func.n = uniform(0, 4) == 0 ? 2.5 : uniform(0, 9);
    return bf;
  }

  std::mt19937_64 rng_;
};

}  // namespace hitab::testing
