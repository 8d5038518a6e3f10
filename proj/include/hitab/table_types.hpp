#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hitab/error.hpp"
#include "hitab/text.hpp"
#include "hitab/value.hpp"

namespace hitab {

enum class Side { Left, Top };

constexpr std::string_view to_string(Side side) { return side == Side::Left ? "LEFT" : "TOP"; }

struct CellCoord {
  int row = 0;
  int col = 0;
  friend auto operator<=>(const CellCoord&, const CellCoord&) = default;
};

inline std::string column_letters(int col) {
  std::string letters;
  int n = col + 1;
  while (n > 0) {
    const int rem = (n - 1) % 26;
    letters.insert(letters.begin(), static_cast<char>('A' + rem));
    n = (n - 1) / 26;
  }
  return letters;
}

// A1-style name of a grid coordinate ("B7" for row 6, col 1).
inline std::string to_a1(CellCoord c) { return column_letters(c.col) + std::to_string(c.row + 1); }

// Inclusive rectangle of merged cells; (r0,c0) is the anchor.
struct Merge {
  int r0 = 0, c0 = 0, r1 = 0, c1 = 0;
  bool contains(CellCoord c) const { return c.row >= r0 && c.row <= r1 && c.col >= c0 && c.col <= c1; }
  CellCoord anchor() const { return {r0, c0}; }
  friend bool operator==(const Merge&, const Merge&) = default;
};

struct CellFormat {
  bool bold = false;
  int indent = 0;
  friend bool operator==(const CellFormat&, const CellFormat&) = default;
};

struct Cell {
  int row = 0;
  int col = 0;
  std::string raw_text;
  CellValue value;
  bool bold = false;
  int indent = 0;
  std::optional<CellCoord> merge_anchor;
};

// Row-major cell grid with merge bookkeeping; the input to extraction.
struct Grid {
  int n_rows = 0;
  int n_cols = 0;
  std::vector<Cell> cells;
  std::vector<Merge> merges;

  const Cell& at(int r, int c) const { return cells[static_cast<std::size_t>(r) * n_cols + c]; }
  bool in_bounds(CellCoord c) const { return c.row >= 0 && c.row < n_rows && c.col >= 0 && c.col < n_cols; }

  // The cell that carries the text for c: its merge anchor, or itself.
  const Cell& display_cell(int r, int c) const {
    const auto& cell = at(r, c);
    if (cell.merge_anchor) return at(cell.merge_anchor->row, cell.merge_anchor->col);
    return cell;
  }

  const Merge* merge_at(CellCoord c) const {
    for (const auto& m : merges) {
      if (m.contains(c)) return &m;
    }
    return nullptr;
  }
};

struct Span {
  int lo = 0;
  int hi = -1;
  bool contains(int i) const { return i >= lo && i <= hi; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct HeaderNode {
  int node_id = 0;
  std::optional<CellCoord> cell;  // absent only for the virtual root
  std::string text;
  int depth = 0;
  int parent = -1;
  std::vector<int> children;
  std::vector<int> own_indices;  // data-axis indices (0-based within the data region)
  Span span;

  bool is_leaf() const { return children.empty(); }
};

// Tree description before validation: what extractors and explicit JSON
// trees produce. Children are in document order.
struct TreeSpec {
  std::optional<CellCoord> cell;
  std::vector<int> own;
  std::vector<TreeSpec> children;

  friend bool operator==(const TreeSpec&, const TreeSpec&) = default;
};

struct NodeRef {
  Side side = Side::Left;
  int id = 0;
  friend auto operator<=>(const NodeRef&, const NodeRef&) = default;
};

class HeaderTree {
 public:
  HeaderTree() = default;

  // Validates and indexes a tree over `axis_size` data indices. Node ids are
  // assigned in preorder, so id order is document order.
  static HeaderTree build(Side side, const TreeSpec& spec, int axis_size, const Grid& grid) {
    HeaderTree tree;
    tree.side_ = side;
    tree.axis_size_ = axis_size;
    if (spec.cell || !spec.own.empty()) {
      fail(ErrorCode::InvalidTree, std::string(to_string(side)) + " root must have no cell and own nothing");
    }
    tree.add(spec, -1, 0, grid);
    tree.finalize();
    return tree;
  }

  Side side() const { return side_; }
  int axis_size() const { return axis_size_; }
  const std::vector<HeaderNode>& nodes() const { return nodes_; }
  const HeaderNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  const HeaderNode& root() const { return nodes_.front(); }
  int owner(int index) const { return owner_.at(static_cast<std::size_t>(index)); }

  int max_depth() const {
    int d = 0;
    for (const auto& n : nodes_) d = std::max(d, n.depth);
    return d;
  }

  // Ancestor-or-self of `id` at `depth`, if the node is at least that deep.
  std::optional<int> ancestor_at_depth(int id, int depth) const {
    int cur = id;
    while (cur >= 0 && nodes_[static_cast<std::size_t>(cur)].depth > depth) {
      cur = nodes_[static_cast<std::size_t>(cur)].parent;
    }
    if (cur < 0 || nodes_[static_cast<std::size_t>(cur)].depth != depth) return std::nullopt;
    return cur;
  }

  bool in_subtree(int ancestor, int index) const { return node(ancestor).span.contains(index); }

  TreeSpec to_spec() const { return spec_of(0); }

 private:
  void add(const TreeSpec& spec, int parent, int depth, const Grid& grid) {
    const int id = static_cast<int>(nodes_.size());
    HeaderNode node;
    node.node_id = id;
    node.cell = spec.cell;
    node.depth = depth;
    node.parent = parent;
    node.own_indices = spec.own;
    std::sort(node.own_indices.begin(), node.own_indices.end());
    if (spec.cell) {
      if (!grid.in_bounds(*spec.cell)) {
        fail(ErrorCode::InvalidTree, "header cell " + to_a1(*spec.cell) + " out of bounds");
      }
      node.text = text::normalize_header_text(grid.display_cell(spec.cell->row, spec.cell->col).raw_text);
    } else if (parent >= 0) {
      fail(ErrorCode::InvalidTree, "only the root may lack a header cell");
    }
    for (int idx : node.own_indices) {
      if (idx < 0 || idx >= axis_size_) {
        fail(ErrorCode::InvalidTree, "own index " + std::to_string(idx) + " outside the data region");
      }
    }
    nodes_.push_back(std::move(node));
    if (parent >= 0) nodes_[static_cast<std::size_t>(parent)].children.push_back(id);
    for (const auto& child : spec.children) add(child, id, depth + 1, grid);
  }

  void finalize() {
    owner_.assign(static_cast<std::size_t>(axis_size_), -1);
    for (const auto& n : nodes_) {
      for (int idx : n.own_indices) {
        auto& slot = owner_[static_cast<std::size_t>(idx)];
        if (slot >= 0) {
          fail(ErrorCode::TreeCoverageGap, std::string(to_string(side_)) + " index " + std::to_string(idx) +
                                               " owned by two headers");
        }
        slot = n.node_id;
      }
    }
    for (int i = 0; i < axis_size_; ++i) {
      if (owner_[static_cast<std::size_t>(i)] < 0) {
        fail(ErrorCode::TreeCoverageGap,
             std::string(to_string(side_)) + " index " + std::to_string(i) + " owned by no header");
      }
    }
    // Postorder span computation; ids are preorder so reverse iteration works.
    std::vector<int> counts(nodes_.size(), 0);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
      auto& n = *it;
      if (n.parent >= 0 && n.is_leaf() && n.own_indices.empty()) {
        fail(ErrorCode::InvalidTree, "leaf header '" + n.text + "' owns no index");
      }
      int lo = axis_size_, hi = -1, count = static_cast<int>(n.own_indices.size());
      for (int idx : n.own_indices) lo = std::min(lo, idx), hi = std::max(hi, idx);
      int prev_hi = -1;
      for (int c : n.children) {
        const auto& child = nodes_[static_cast<std::size_t>(c)];
        if (child.span.lo <= prev_hi) {
          fail(ErrorCode::InvalidTree, "children of '" + n.text + "' are not in document order");
        }
        prev_hi = child.span.hi;
        lo = std::min(lo, child.span.lo);
        hi = std::max(hi, child.span.hi);
        count += counts[static_cast<std::size_t>(c)];
      }
      n.span = {lo, hi};
      counts[static_cast<std::size_t>(n.node_id)] = count;
      if (hi >= lo && hi - lo + 1 != count) {
        fail(ErrorCode::InvalidTree, "span of '" + n.text + "' is not contiguous");
      }
    }
  }

  TreeSpec spec_of(int id) const {
    const auto& n = node(id);
    TreeSpec spec;
    spec.cell = n.cell;
    spec.own = n.own_indices;
    for (int c : n.children) spec.children.push_back(spec_of(c));
    return spec;
  }

  Side side_ = Side::Left;
  int axis_size_ = 0;
  std::vector<HeaderNode> nodes_;
  std::vector<int> owner_;
};

// Rectangular selection of data coordinates (row set x column set).
struct Region {
  std::vector<int> rows;
  std::vector<int> cols;
  std::vector<NodeRef> last_filter_order;

  std::size_t cell_count() const { return rows.size() * cols.size(); }
  const std::vector<int>& axis(Side side) const { return side == Side::Left ? rows : cols; }
  std::vector<int>& axis(Side side) { return side == Side::Left ? rows : cols; }

  friend bool operator==(const Region&, const Region&) = default;
};

}  // namespace hitab
