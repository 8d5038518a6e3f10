#pragma once

#include <string>
#include <vector>

#include "hitab/hitab.hpp"

namespace hitab::testing {

// Two years, each with a total row and two countries indented beneath it;
// two flat top headers. Data rows: 0=2012, 1=china, 2=u.s., 3=2013, 4=china, 5=u.s.
inline TableInput f1_input() {
  TableInput in;
  in.table_id = "f1";
  in.cells = {
      {"", "gdp", "population"},
      {"2012", "", ""},
      {"china", "8.5", "1351"},
      {"u.s.", "16.2", "314"},
      {"2013", "", ""},
      {"china", "9.6", "1357"},
      {"u.s.", "16.8", "316"},
  };
  in.formats.assign(in.cells.size(), std::vector<CellFormat>(3));
  for (int r : {2, 3, 5, 6}) in.formats[r][0].indent = 1;
  return in;
}

inline HierTable f1() { return build_table(f1_input()); }

inline NodeRef left_node(const HierTable& t, int grid_row) { return *t.header_at({grid_row, 0}); }
inline NodeRef top_node(const HierTable& t, int grid_col) { return *t.header_at({0, grid_col}); }

inline Region region_of(std::vector<int> rows, std::vector<int> cols) {
  Region r;
  r.rows = std::move(rows);
  r.cols = std::move(cols);
  return r;
}

inline std::vector<std::string> headers_of(const ExecValue& v) { return std::get<HeaderListVal>(v).headers; }
inline double number_of(const ExecValue& v) { return std::get<NumberVal>(v).value; }

// Helper for tables given only as a grid with single header row/col.
inline HierTable grid_table(std::vector<std::vector<std::string>> cells, int top = 1, int left = 1) {
  TableInput in;
  in.table_id = "grid";
  in.cells = std::move(cells);
  in.top_header_rows = top;
  in.left_header_cols = left;
  return build_table(in);
}

}  // namespace hitab::testing
