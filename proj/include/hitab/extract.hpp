#pragma once

// Header-tree inference from cell formats (merging, indentation, bold) for
// tables that arrive without explicit trees.

#include <functional>
#include <map>
#include <set>
#include <tuple>
#include <vector>

#include "hitab/table_types.hpp"

namespace hitab {

namespace detail {

struct ProtoNode {
  CellCoord cell;
  int parent = -1;
  std::vector<int> children;
  std::vector<int> own;
};

inline TreeSpec to_tree_spec(const std::vector<ProtoNode>& nodes, const std::vector<int>& roots) {
  std::function<TreeSpec(int)> convert = [&](int id) {
    const auto& n = nodes[static_cast<std::size_t>(id)];
    TreeSpec spec;
    spec.cell = n.cell;
    spec.own = n.own;
    for (int c : n.children) spec.children.push_back(convert(c));
    return spec;
  };
  TreeSpec root;
  for (int r : roots) root.children.push_back(convert(r));
  return root;
}

}  // namespace detail

// Top tree: header row i yields nodes one level below the nearest enclosing
// merged cell in rows above. Each data column is owned by the deepest header
// whose column range covers it.
inline TreeSpec extract_top_tree(const Grid& grid, int top_header_rows, int left_header_cols) {
  if (top_header_rows < 1) fail(ErrorCode::TreeCoverageGap, "no top header rows to extract from");
  struct Range {
    int row, lo, hi;
  };
  std::vector<detail::ProtoNode> nodes;
  std::vector<Range> ranges;
  std::set<CellCoord> seen;
  const int data_cols = grid.n_cols - left_header_cols;

  for (int r = 0; r < top_header_rows; ++r) {
    for (int c = left_header_cols; c < grid.n_cols; ++c) {
      const auto& cell = grid.at(r, c);
      const CellCoord anchor = cell.merge_anchor.value_or(CellCoord{r, c});
      if (anchor.row != r || !seen.insert(anchor).second) continue;
      const auto& shown = grid.at(anchor.row, anchor.col);
      if (text::trim(shown.raw_text).empty()) continue;
      int lo = c, hi = c;
      if (const auto* m = grid.merge_at(anchor)) hi = std::min(m->c1, grid.n_cols - 1);
      lo = std::max(lo, left_header_cols);

      Range range{r, lo - left_header_cols, hi - left_header_cols};
      int parent = -1;
      for (int i = static_cast<int>(ranges.size()) - 1; i >= 0; --i) {
        const auto& cand = ranges[static_cast<std::size_t>(i)];
        if (cand.row < r && cand.lo <= range.lo && cand.hi >= range.hi) {
          if (parent < 0 || cand.row > ranges[static_cast<std::size_t>(parent)].row) parent = i;
        }
      }
      detail::ProtoNode node;
      node.cell = anchor;
      node.parent = parent;
      nodes.push_back(node);
      ranges.push_back(range);
      if (parent >= 0) nodes[static_cast<std::size_t>(parent)].children.push_back(static_cast<int>(nodes.size()) - 1);
    }
  }

  for (int dc = 0; dc < data_cols; ++dc) {
    int best = -1;
    for (std::size_t i = 0; i < ranges.size(); ++i) {
      if (ranges[i].lo <= dc && ranges[i].hi >= dc) {
        if (best < 0 || ranges[i].row > ranges[static_cast<std::size_t>(best)].row) best = static_cast<int>(i);
      }
    }
    if (best < 0) {
      fail(ErrorCode::TreeCoverageGap, "data column " + column_letters(dc + left_header_cols) + " has no top header");
    }
    nodes[static_cast<std::size_t>(best)].own.push_back(dc);
  }

  // Siblings in column order.
  auto by_lo = [&](int a, int b) {
    return ranges[static_cast<std::size_t>(a)].lo < ranges[static_cast<std::size_t>(b)].lo;
  };
  std::vector<int> roots;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].parent < 0) roots.push_back(static_cast<int>(i));
    std::stable_sort(nodes[i].children.begin(), nodes[i].children.end(), by_lo);
  }
  std::stable_sort(roots.begin(), roots.end(), by_lo);
  return detail::to_tree_spec(nodes, roots);
}

// Left tree: every new header cell gets a rank (column, indent, bold before
// plain) and becomes the child of the nearest preceding header with strictly
// smaller rank; equal ranks are siblings. The innermost header cell of a data
// row owns that row.
inline TreeSpec extract_left_tree(const Grid& grid, int left_header_cols, int top_header_rows) {
  if (left_header_cols < 1) fail(ErrorCode::TreeCoverageGap, "no left header columns to extract from");
  using Rank = std::tuple<int, int, int>;
  std::vector<detail::ProtoNode> nodes;
  std::vector<int> roots;
  std::map<CellCoord, int> node_of_anchor;
  std::vector<std::pair<Rank, int>> stack;

  for (int r = top_header_rows; r < grid.n_rows; ++r) {
    int row_owner = -1;
    for (int c = 0; c < left_header_cols; ++c) {
      const auto& cell = grid.at(r, c);
      const CellCoord anchor = cell.merge_anchor.value_or(CellCoord{r, c});
      const auto& shown = grid.at(anchor.row, anchor.col);
      if (text::trim(shown.raw_text).empty()) continue;
      if (auto it = node_of_anchor.find(anchor); it != node_of_anchor.end()) {
        row_owner = it->second;  // continuation of a merge that started earlier
        continue;
      }
      const Rank rank{anchor.col, shown.indent, shown.bold ? 0 : 1};
      while (!stack.empty() && stack.back().first >= rank) stack.pop_back();
      detail::ProtoNode node;
      node.cell = anchor;
      node.parent = stack.empty() ? -1 : stack.back().second;
      const int id = static_cast<int>(nodes.size());
      nodes.push_back(node);
      if (node.parent >= 0) {
        nodes[static_cast<std::size_t>(node.parent)].children.push_back(id);
      } else {
        roots.push_back(id);
      }
      stack.emplace_back(rank, id);
      node_of_anchor.emplace(anchor, id);
      row_owner = id;
    }
    if (row_owner < 0) {
      fail(ErrorCode::TreeCoverageGap, "data row " + std::to_string(r + 1) + " has no left header");
    }
    nodes[static_cast<std::size_t>(row_owner)].own.push_back(r - top_header_rows);
  }
  return detail::to_tree_spec(nodes, roots);
}

}  // namespace hitab
