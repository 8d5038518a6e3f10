#pragma once

// Text encodings of tables: header linearization for QA encoders, flattened
// grids for flat-table consumers, and highlighted-cell serialization for NLG.

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "hitab/table.hpp"

namespace hitab {

inline constexpr std::string_view kLevelToken = "[LEVEL]";
inline constexpr std::string_view kSepToken = "[SEP]";
inline constexpr std::string_view kOpToken = "[OP]";
inline constexpr std::string_view kResToken = "[RES]";

enum class HeaderType { String, Number, DateTime };

constexpr std::string_view to_string(HeaderType t) {
  switch (t) {
    case HeaderType::String: return "string";
    case HeaderType::Number: return "number";
    case HeaderType::DateTime: return "datetime";
  }
  return "string";
}

// Years 1000-2999 and ISO dates are datetime; other numbers are number.
inline HeaderType header_type(std::string_view raw) {
  const auto s = text::strip_footnote_markers(text::trim(raw));
  if (s.size() == 4 && detail::all_digits(s) && (s[0] == '1' || s[0] == '2')) return HeaderType::DateTime;
  const auto v = normalize_quantity(raw);
  if (v.kind() == ValueKind::DateTime) return HeaderType::DateTime;
  if (v.is_number()) return HeaderType::Number;
  return HeaderType::String;
}

inline std::vector<std::string> linearize_tokens(const HierTable& table) {
  std::vector<std::string> out{std::string(kLevelToken)};
  for (Side side : {Side::Left, Side::Top}) {
    const auto& tree = table.tree(side);
    for (int depth = 1; depth <= tree.max_depth(); ++depth) {
      out.emplace_back(kLevelToken);
      for (const auto& n : tree.nodes()) {
        if (n.depth != depth) continue;
        const auto& raw = table.grid().display_cell(n.cell->row, n.cell->col).raw_text;
        out.push_back(n.text);
        out.emplace_back("|");
        out.emplace_back(to_string(header_type(raw)));
      }
    }
  }
  return out;
}

// "[LEVEL]" for left level zero, then one "[LEVEL]" per left level and per
// top level, each followed by its headers as "name | type".
inline std::string linearize_table(const HierTable& table) { return text::join(linearize_tokens(table), " "); }

namespace detail {

inline bool in_header_area(const HierTable& t, CellCoord c) {
  return c.row < t.top_header_rows() || c.col < t.left_header_cols();
}

inline std::string shown_text(const HierTable& t, CellCoord c) {
  return std::string(text::trim(t.grid().display_cell(c.row, c.col).raw_text));
}

}  // namespace detail

// Same shape as the grid; header merges are unmerged by copying the anchor
// text, and left headers nested by indentation within one column carry
// their ancestors' text as a prefix. Row 0 serves as the column names.
inline std::vector<std::vector<std::string>> flatten_for_export(const HierTable& table) {
  std::vector<std::vector<std::string>> out(static_cast<std::size_t>(table.n_rows()),
                                            std::vector<std::string>(static_cast<std::size_t>(table.n_cols())));
  for (int r = 0; r < table.n_rows(); ++r) {
    for (int c = 0; c < table.n_cols(); ++c) {
      const auto& cell = table.cell(r, c);
      const bool header_merge = cell.merge_anchor && detail::in_header_area(table, *cell.merge_anchor);
      out[r][c] = header_merge ? detail::shown_text(table, {r, c}) : cell.raw_text;
    }
  }
  const auto& left = table.left_tree();
  for (const auto& n : left.nodes()) {
    if (!n.cell) continue;
    std::vector<std::string> path{detail::shown_text(table, *n.cell)};
    for (int p = n.parent; p > 0; p = left.node(p).parent) {
      const auto& pc = *left.node(p).cell;
      if (pc.col != n.cell->col) break;
      path.push_back(detail::shown_text(table, pc));
    }
    if (path.size() == 1) continue;
    std::reverse(path.begin(), path.end());
    const auto prefixed = text::join(path, " ");
    // Every grid cell showing this header gets the prefixed text.
    const auto* m = table.grid().merge_at(*n.cell);
    const int r1 = m ? m->r1 : n.cell->row;
    for (int r = n.cell->row; r <= r1; ++r) out[r][n.cell->col] = prefixed;
  }
  return out;
}

// Highlighted cells plus: data cells indexed by highlighted headers, owning
// headers (both axes) of every selected data cell, and all ancestors of
// selected headers. Row-major order.
inline std::vector<CellCoord> select_subtable(const HierTable& table, const std::vector<CellCoord>& highlighted) {
  std::set<CellCoord> data;
  std::set<NodeRef> headers;
  for (auto c : highlighted) {
    if (!table.grid().in_bounds(c)) fail(ErrorCode::CellOutOfBounds, to_a1(c) + " outside the table");
    if (table.is_data_cell(c)) {
      data.insert(c);
    } else if (auto ref = table.header_at(c)) {
      headers.insert(*ref);
    }
  }
  for (auto ref : headers) {
    const auto span = table.node(ref).span;
    for (int i = span.lo; i <= span.hi; ++i) {
      if (ref.side == Side::Left) {
        for (int dc = 0; dc < table.data_col_count(); ++dc) data.insert(table.grid_coord(i, dc));
      } else {
        for (int dr = 0; dr < table.data_row_count(); ++dr) data.insert(table.grid_coord(dr, i));
      }
    }
  }
  for (auto c : data) {
    const int dr = c.row - table.top_header_rows(), dc = c.col - table.left_header_cols();
    headers.insert({Side::Left, table.left_tree().owner(dr)});
    headers.insert({Side::Top, table.top_tree().owner(dc)});
  }
  std::set<CellCoord> out(data.begin(), data.end());
  for (auto ref : headers) {
    const auto& tree = table.tree(ref.side);
    for (int id = ref.id; id > 0; id = tree.node(id).parent) out.insert(*tree.node(id).cell);
  }
  return {out.begin(), out.end()};
}

inline constexpr int kResultSignificantDigits = 4;

inline std::string serialize_cell(const HierTable& table, CellCoord c) {
  if (table.is_data_cell(c)) {
    const auto& v = table.cell(c.row, c.col).value;
    if (v.is_number()) return text::format_number(v.as_number());
  }
  return detail::shown_text(table, c);
}

// Sub-table cells row by row joined by [SEP], then "[OP] label [RES] value"
// per operator.
inline std::string serialize_for_nlg(const HierTable& table, const std::vector<CellCoord>& highlighted,
                                     const std::vector<std::string>& operators, const std::vector<double>& results) {
  if (operators.size() != results.size()) {
    fail(ErrorCode::LengthMismatch, std::to_string(operators.size()) + " operators but " +
                                        std::to_string(results.size()) + " results");
  }
  std::vector<std::string> cells;
  for (auto c : select_subtable(table, highlighted)) cells.push_back(serialize_cell(table, c));
  std::string out = text::join(cells, " " + std::string(kSepToken) + " ");
  for (std::size_t i = 0; i < operators.size(); ++i) {
    if (!out.empty()) out += " ";
    out += std::string(kOpToken) + " " + operators[i] + " " + std::string(kResToken) + " " +
           text::format_number(text::round_significant(results[i], kResultSignificantDigits));
  }
  return out;
}

}  // namespace hitab
