#pragma once

// The hierarchical table: an immutable cell grid, header bounds, and the left
// and top header trees that index its data region.

#include <optional>
#include <string>
#include <vector>

#include "hitab/extract.hpp"
#include "hitab/table_types.hpp"

namespace hitab {

struct TableInput {
  std::string table_id;
  std::vector<std::vector<std::string>> cells;
  std::vector<Merge> merges;
  std::vector<std::vector<CellFormat>> formats;  // empty, or same shape as cells
  int top_header_rows = 1;
  int left_header_cols = 1;
  std::optional<TreeSpec> top_tree;
  std::optional<TreeSpec> left_tree;
};

class HierTable {
 public:
  const std::string& table_id() const { return table_id_; }
  int n_rows() const { return grid_.n_rows; }
  int n_cols() const { return grid_.n_cols; }
  int top_header_rows() const { return top_header_rows_; }
  int left_header_cols() const { return left_header_cols_; }
  int data_row_count() const { return grid_.n_rows - top_header_rows_; }
  int data_col_count() const { return grid_.n_cols - left_header_cols_; }

  const Grid& grid() const { return grid_; }
  const Cell& cell(int r, int c) const { return grid_.at(r, c); }
  const Cell& data_cell(int data_row, int data_col) const {
    return grid_.at(data_row + top_header_rows_, data_col + left_header_cols_);
  }
  const std::vector<Merge>& merges() const { return grid_.merges; }

  const HeaderTree& tree(Side side) const { return side == Side::Left ? left_tree_ : top_tree_; }
  const HeaderTree& left_tree() const { return left_tree_; }
  const HeaderTree& top_tree() const { return top_tree_; }
  const HeaderNode& node(NodeRef ref) const { return tree(ref.side).node(ref.id); }

  CellCoord grid_coord(int data_row, int data_col) const {
    return {data_row + top_header_rows_, data_col + left_header_cols_};
  }
  bool is_data_cell(CellCoord c) const {
    return grid_.in_bounds(c) && c.row >= top_header_rows_ && c.col >= left_header_cols_;
  }

  // Header node whose cell is c (merged continuations resolve to the anchor).
  std::optional<NodeRef> header_at(CellCoord c) const {
    if (!grid_.in_bounds(c)) return std::nullopt;
    const auto anchor = grid_.at(c.row, c.col).merge_anchor.value_or(c);
    if (auto it = header_index_.find(anchor); it != header_index_.end()) return it->second;
    return std::nullopt;
  }

 private:
  friend HierTable build_table(const TableInput& input);

  std::string table_id_;
  Grid grid_;
  int top_header_rows_ = 0;
  int left_header_cols_ = 0;
  HeaderTree left_tree_;
  HeaderTree top_tree_;
  std::map<CellCoord, NodeRef> header_index_;
};

namespace detail {

inline Grid make_grid(const TableInput& input) {
  Grid grid;
  grid.n_rows = static_cast<int>(input.cells.size());
  grid.n_cols = grid.n_rows ? static_cast<int>(input.cells.front().size()) : 0;
  for (const auto& row : input.cells) {
    if (static_cast<int>(row.size()) != grid.n_cols) fail(ErrorCode::SchemaViolation, "grid is not rectangular");
  }
  const bool has_formats = !input.formats.empty();
  if (has_formats) {
    if (input.formats.size() != input.cells.size()) fail(ErrorCode::SchemaViolation, "formats shape mismatch");
    for (const auto& row : input.formats) {
      if (static_cast<int>(row.size()) != grid.n_cols) fail(ErrorCode::SchemaViolation, "formats shape mismatch");
    }
  }
  grid.cells.reserve(static_cast<std::size_t>(grid.n_rows) * grid.n_cols);
  for (int r = 0; r < grid.n_rows; ++r) {
    for (int c = 0; c < grid.n_cols; ++c) {
      Cell cell;
      cell.row = r;
      cell.col = c;
      cell.raw_text = input.cells[r][c];
      cell.value = normalize_quantity(cell.raw_text);
      if (has_formats) {
        const auto& fmt = input.formats[r][c];
        if (fmt.indent < 0) fail(ErrorCode::SchemaViolation, "negative indent at " + to_a1({r, c}));
        cell.bold = fmt.bold;
        cell.indent = fmt.indent;
      }
      grid.cells.push_back(std::move(cell));
    }
  }
  for (std::size_t i = 0; i < input.merges.size(); ++i) {
    const auto& m = input.merges[i];
    if (m.r0 < 0 || m.c0 < 0 || m.r1 >= grid.n_rows || m.c1 >= grid.n_cols || m.r0 > m.r1 || m.c0 > m.c1) {
      fail(ErrorCode::MergeOutOfBounds, "merge " + to_a1(m.anchor()) + ":" + to_a1({m.r1, m.c1}));
    }
    for (std::size_t j = 0; j < i; ++j) {
      const auto& o = input.merges[j];
      const bool disjoint = m.r1 < o.r0 || o.r1 < m.r0 || m.c1 < o.c0 || o.c1 < m.c0;
      if (!disjoint) {
        fail(ErrorCode::OverlappingMerge, "merge at " + to_a1(m.anchor()) + " overlaps merge at " + to_a1(o.anchor()));
      }
    }
    for (int r = m.r0; r <= m.r1; ++r) {
      for (int c = m.c0; c <= m.c1; ++c) {
        grid.cells[static_cast<std::size_t>(r) * grid.n_cols + c].merge_anchor = m.anchor();
      }
    }
  }
  grid.merges = input.merges;
  return grid;
}

}  // namespace detail

// Validates the grid, infers missing trees from formats, and checks that the
// trees partition the data rows and columns.
inline HierTable build_table(const TableInput& input) {
  HierTable table;
  table.table_id_ = input.table_id;
  table.grid_ = detail::make_grid(input);
  table.top_header_rows_ = input.top_header_rows;
  table.left_header_cols_ = input.left_header_cols;
  if (input.top_header_rows < 0 || input.left_header_cols < 0 || input.top_header_rows >= table.grid_.n_rows ||
      input.left_header_cols >= table.grid_.n_cols) {
    fail(ErrorCode::EmptyDataRegion, "header bounds leave no data cells");
  }
  const auto top_spec = input.top_tree ? *input.top_tree
                                       : extract_top_tree(table.grid_, input.top_header_rows, input.left_header_cols);
  const auto left_spec = input.left_tree
                             ? *input.left_tree
                             : extract_left_tree(table.grid_, input.left_header_cols, input.top_header_rows);
  table.top_tree_ = HeaderTree::build(Side::Top, top_spec, table.data_col_count(), table.grid_);
  table.left_tree_ = HeaderTree::build(Side::Left, left_spec, table.data_row_count(), table.grid_);
  for (Side side : {Side::Left, Side::Top}) {
    for (const auto& n : table.tree(side).nodes()) {
      if (n.cell) table.header_index_.emplace(*n.cell, NodeRef{side, n.node_id});
    }
  }
  return table;
}

enum class LookupSide { Left, Top, Both };

// Nodes whose normalized text equals the normalized query, left tree first,
// each tree in document order.
inline std::vector<NodeRef> lookup_nodes(const HierTable& table, std::string_view query, LookupSide side) {
  const auto needle = text::normalize_header_text(query);
  std::vector<NodeRef> out;
  auto scan = [&](Side s) {
    for (const auto& n : table.tree(s).nodes()) {
      if (n.cell && n.text == needle) out.push_back({s, n.node_id});
    }
  };
  if (side != LookupSide::Top) scan(Side::Left);
  if (side != LookupSide::Left) scan(Side::Top);
  return out;
}

inline Region full_region(const HierTable& table) {
  Region region;
  for (int r = 0; r < table.data_row_count(); ++r) region.rows.push_back(r);
  for (int c = 0; c < table.data_col_count(); ++c) region.cols.push_back(c);
  return region;
}

}  // namespace hitab
