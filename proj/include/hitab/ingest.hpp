#pragma once

// Canonical table JSON / sample JSONL readers and writers, plus the dataset
// admission filters.

#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hitab/table.hpp"

namespace hitab {

using Json = nlohmann::json;

struct EntityLink {
  std::string mention;
  CellCoord cell;
  friend bool operator==(const EntityLink&, const EntityLink&) = default;
};

// A quantity mention points either at one cell or at a formula over cells.
struct QuantityLink {
  std::string mention;
  std::optional<std::string> formula;
  std::optional<CellCoord> cell;
  friend bool operator==(const QuantityLink&, const QuantityLink&) = default;
};

struct Sample {
  std::string sample_id;
  std::string table_id;
  std::string question;
  std::vector<CellValue> answers;
  std::optional<std::string> formula;
  std::vector<EntityLink> entity_links;
  std::vector<QuantityLink> quantity_links;
  std::optional<std::vector<CellCoord>> highlighted_cells;
  std::optional<std::vector<std::string>> operators;
  std::optional<std::string> target_text;
};

namespace detail {

[[noreturn]] inline void schema(const std::string& what) { fail(ErrorCode::SchemaViolation, what); }

inline Json parse_json(std::string_view bytes) {
  try {
    return Json::parse(bytes.begin(), bytes.end());
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::MalformedJson, e.what());
  }
}

inline CellCoord coord_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    schema(std::string(what) + " must be [row, col]");
  }
  return {j[0].get<int>(), j[1].get<int>()};
}

inline Json coord_to_json(CellCoord c) { return Json::array({c.row, c.col}); }

inline TreeSpec tree_from_json(const Json& j) {
  if (!j.is_object()) schema("tree node must be an object");
  TreeSpec spec;
  if (j.contains("cell") && !j["cell"].is_null()) spec.cell = coord_from_json(j["cell"], "tree node cell");
  if (j.contains("own")) {
    if (!j["own"].is_array()) schema("tree node 'own' must be an array");
    for (const auto& v : j["own"]) {
      if (!v.is_number_integer()) schema("tree node 'own' entries must be integers");
      spec.own.push_back(v.get<int>());
    }
  }
  if (j.contains("children")) {
    if (!j["children"].is_array()) schema("tree node 'children' must be an array");
    for (const auto& c : j["children"]) spec.children.push_back(tree_from_json(c));
  }
  return spec;
}

inline Json tree_to_json(const TreeSpec& spec) {
  Json j;
  j["cell"] = spec.cell ? coord_to_json(*spec.cell) : Json(nullptr);
  j["own"] = spec.own;
  j["children"] = Json::array();
  for (const auto& c : spec.children) j["children"].push_back(tree_to_json(c));
  return j;
}

inline CellValue value_from_json(const Json& j) {
  if (j.is_number()) return CellValue::number(j.get<double>());
  if (j.is_string()) return j.get<std::string>().empty() ? CellValue::empty() : CellValue::text(j.get<std::string>());
  if (j.is_null()) return CellValue::empty();
  schema("answer values must be numbers or strings");
}

inline Json value_to_json(const CellValue& v) {
  switch (v.kind()) {
    case ValueKind::Number: return v.as_number();
    case ValueKind::Text:
    case ValueKind::DateTime: return v.as_string();
    case ValueKind::Empty: return "";
  }
  return nullptr;
}

inline int int_field(const Json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) schema(std::string("'") + key + "' must be an integer");
  return j[key].get<int>();
}

}  // namespace detail

inline TableInput table_input_from_json(const Json& doc) {
  using detail::schema;
  if (!doc.is_object()) schema("table document must be an object");
  if (!doc.contains("cells") || !doc["cells"].is_array()) schema("missing 'cells' array");
  TableInput input;
  if (doc.contains("table_id")) {
    if (!doc["table_id"].is_string()) schema("'table_id' must be a string");
    input.table_id = doc["table_id"].get<std::string>();
  }
  for (const auto& row : doc["cells"]) {
    if (!row.is_array()) schema("'cells' rows must be arrays");
    std::vector<std::string> out;
    for (const auto& c : row) {
      if (c.is_string()) {
        out.push_back(c.get<std::string>());
      } else if (c.is_null()) {
        out.emplace_back();
      } else if (c.is_number()) {
        out.push_back(c.dump());
      } else {
        schema("cell entries must be strings");
      }
    }
    input.cells.push_back(std::move(out));
  }
  if (doc.contains("merged")) {
    if (!doc["merged"].is_array()) schema("'merged' must be an array");
    for (const auto& m : doc["merged"]) {
      if (!m.is_object()) schema("merged entries must be objects");
      Merge merge;
      for (auto [key, slot] : {std::pair{"r0", &merge.r0}, {"c0", &merge.c0}, {"r1", &merge.r1}, {"c1", &merge.c1}}) {
        if (!m.contains(key) || !m[key].is_number_integer()) schema(std::string("merged entry missing '") + key + "'");
        *slot = m[key].get<int>();
      }
      input.merges.push_back(merge);
    }
  }
  if (doc.contains("formats") && !doc["formats"].is_null()) {
    if (!doc["formats"].is_array()) schema("'formats' must be an array");
    for (const auto& row : doc["formats"]) {
      if (!row.is_array()) schema("'formats' rows must be arrays");
      std::vector<CellFormat> out;
      for (const auto& f : row) {
        CellFormat fmt;
        if (f.is_object()) {
          if (f.contains("bold")) {
            if (!f["bold"].is_boolean()) schema("'bold' must be a boolean");
            fmt.bold = f["bold"].get<bool>();
          }
          fmt.indent = detail::int_field(f, "indent", 0);
        } else if (!f.is_null()) {
          schema("format entries must be objects");
        }
        out.push_back(fmt);
      }
      input.formats.push_back(std::move(out));
    }
  }
  input.top_header_rows = detail::int_field(doc, "top_header_rows", 1);
  input.left_header_cols = detail::int_field(doc, "left_header_cols", 1);
  if (doc.contains("top_tree") && !doc["top_tree"].is_null()) input.top_tree = detail::tree_from_json(doc["top_tree"]);
  if (doc.contains("left_tree") && !doc["left_tree"].is_null()) {
    input.left_tree = detail::tree_from_json(doc["left_tree"]);
  }
  return input;
}

inline HierTable load_table(std::string_view bytes) {
  return build_table(table_input_from_json(detail::parse_json(bytes)));
}

// Debug writer: always emits formats and explicit trees so that loading the
// output reproduces the same table.
inline Json table_to_json(const HierTable& table) {
  Json doc;
  doc["table_id"] = table.table_id();
  doc["cells"] = Json::array();
  doc["formats"] = Json::array();
  for (int r = 0; r < table.n_rows(); ++r) {
    Json row = Json::array();
    Json fmt = Json::array();
    for (int c = 0; c < table.n_cols(); ++c) {
      const auto& cell = table.cell(r, c);
      row.push_back(cell.raw_text);
      fmt.push_back({{"bold", cell.bold}, {"indent", cell.indent}});
    }
    doc["cells"].push_back(std::move(row));
    doc["formats"].push_back(std::move(fmt));
  }
  doc["merged"] = Json::array();
  for (const auto& m : table.merges()) doc["merged"].push_back({{"r0", m.r0}, {"c0", m.c0}, {"r1", m.r1}, {"c1", m.c1}});
  doc["top_header_rows"] = table.top_header_rows();
  doc["left_header_cols"] = table.left_header_cols();
  doc["top_tree"] = detail::tree_to_json(table.top_tree().to_spec());
  doc["left_tree"] = detail::tree_to_json(table.left_tree().to_spec());
  return doc;
}

inline std::string save_table(const HierTable& table) { return table_to_json(table).dump(); }

inline Sample sample_from_json(const Json& j) {
  using detail::schema;
  if (!j.is_object()) schema("sample must be an object");
  Sample s;
  auto str = [&](const char* key, bool required) -> std::optional<std::string> {
    if (!j.contains(key) || j[key].is_null()) {
      if (required) schema(std::string("sample missing '") + key + "'");
      return std::nullopt;
    }
    if (!j[key].is_string()) schema(std::string("'") + key + "' must be a string");
    return j[key].get<std::string>();
  };
  s.sample_id = *str("sample_id", true);
  s.table_id = str("table_id", false).value_or("");
  s.question = str("question", false).value_or("");
  s.formula = str("formula", false);
  s.target_text = str("target_text", false);
  if (j.contains("answers") && !j["answers"].is_null()) {
    const auto& a = j["answers"];
    if (a.is_array()) {
      for (const auto& v : a) s.answers.push_back(detail::value_from_json(v));
    } else {
      s.answers.push_back(detail::value_from_json(a));
    }
  }
  if (j.contains("entity_links") && !j["entity_links"].is_null()) {
    if (!j["entity_links"].is_object()) schema("'entity_links' must be an object");
    for (const auto& [mention, target] : j["entity_links"].items()) {
      // Either one [r,c] or a list of them.
      if (target.is_array() && !target.empty() && target[0].is_array()) {
        for (const auto& c : target) s.entity_links.push_back({mention, detail::coord_from_json(c, "entity link")});
      } else {
        s.entity_links.push_back({mention, detail::coord_from_json(target, "entity link")});
      }
    }
  }
  if (j.contains("quantity_links") && !j["quantity_links"].is_null()) {
    if (!j["quantity_links"].is_object()) schema("'quantity_links' must be an object");
    for (const auto& [mention, target] : j["quantity_links"].items()) {
      QuantityLink link;
      link.mention = mention;
      if (target.is_string()) {
        link.formula = target.get<std::string>();
      } else {
        link.cell = detail::coord_from_json(target, "quantity link");
      }
      s.quantity_links.push_back(std::move(link));
    }
  }
  if (j.contains("highlighted_cells") && !j["highlighted_cells"].is_null()) {
    std::vector<CellCoord> cells;
    for (const auto& c : j["highlighted_cells"]) cells.push_back(detail::coord_from_json(c, "highlighted cell"));
    s.highlighted_cells = std::move(cells);
  }
  if (j.contains("operators") && !j["operators"].is_null()) {
    std::vector<std::string> ops;
    for (const auto& o : j["operators"]) {
      if (!o.is_string()) schema("'operators' entries must be strings");
      ops.push_back(o.get<std::string>());
    }
    s.operators = std::move(ops);
  }
  return s;
}

inline Json sample_to_json(const Sample& s) {
  Json j;
  j["sample_id"] = s.sample_id;
  j["table_id"] = s.table_id;
  j["question"] = s.question;
  j["answers"] = Json::array();
  for (const auto& a : s.answers) j["answers"].push_back(detail::value_to_json(a));
  j["formula"] = s.formula ? Json(*s.formula) : Json(nullptr);
  j["entity_links"] = Json::object();
  for (const auto& l : s.entity_links) {
    auto& slot = j["entity_links"][l.mention];
    if (slot.is_null()) {
      slot = detail::coord_to_json(l.cell);
    } else {
      if (!slot[0].is_array()) slot = Json::array({slot});
      slot.push_back(detail::coord_to_json(l.cell));
    }
  }
  j["quantity_links"] = Json::object();
  for (const auto& q : s.quantity_links) {
    j["quantity_links"][q.mention] = q.formula ? Json(*q.formula) : detail::coord_to_json(*q.cell);
  }
  if (s.highlighted_cells) {
    j["highlighted_cells"] = Json::array();
    for (auto c : *s.highlighted_cells) j["highlighted_cells"].push_back(detail::coord_to_json(c));
  }
  if (s.operators) j["operators"] = *s.operators;
  if (s.target_text) j["target_text"] = *s.target_text;
  return j;
}

inline std::vector<Sample> load_samples(std::istream& in) {
  std::vector<Sample> out;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    out.push_back(sample_from_json(detail::parse_json(line)));
  }
  return out;
}

inline std::vector<Sample> load_samples(std::string_view jsonl) {
  std::istringstream in{std::string(jsonl)};
  return load_samples(in);
}

// Checks every coordinate a sample carries against its table.
inline void validate_sample(const Sample& s, const HierTable& table) {
  auto check = [&](CellCoord c, const char* what) {
    if (!table.grid().in_bounds(c)) {
      fail(ErrorCode::CellOutOfBounds, s.sample_id + ": " + what + " " + to_a1(c) + " outside table");
    }
  };
  for (const auto& l : s.entity_links) check(l.cell, "entity link");
  for (const auto& q : s.quantity_links) {
    if (q.cell) check(*q.cell, "quantity link");
  }
  if (s.highlighted_cells) {
    for (auto c : *s.highlighted_cells) check(c, "highlighted cell");
  }
}

enum class RejectReason {
  TooFewRows,
  TooManyRows,
  TooFewCols,
  TooManyCols,
  TooManyNonAscii,
  TooManyTokens,
  ExtractionFailed,
  TooDeep,
};

constexpr std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::TooFewRows: return "TooFewRows";
    case RejectReason::TooManyRows: return "TooManyRows";
    case RejectReason::TooFewCols: return "TooFewCols";
    case RejectReason::TooManyCols: return "TooManyCols";
    case RejectReason::TooManyNonAscii: return "TooManyNonAscii";
    case RejectReason::TooManyTokens: return "TooManyTokens";
    case RejectReason::ExtractionFailed: return "ExtractionFailed";
    case RejectReason::TooDeep: return "TooDeep";
  }
  return "Unknown";
}

struct AdmitDecision {
  std::optional<RejectReason> reject;
  std::string detail;

  bool admitted() const { return !reject.has_value(); }
  friend bool operator==(const AdmitDecision& a, const AdmitDecision& b) { return a.reject == b.reject; }
};

struct AdmitLimits {
  int min_exclusive = 2;   // rows and columns must exceed this
  int max_exclusive = 64;  // and stay below this
  std::size_t max_non_ascii = 1;
  std::size_t max_tokens = 20;
  int max_levels = 4;
};

inline AdmitDecision admit_table(const HierTable& table, const AdmitLimits& limits = {}) {
  auto reject = [](RejectReason r, std::string detail) { return AdmitDecision{r, std::move(detail)}; };
  if (table.n_rows() <= limits.min_exclusive) return reject(RejectReason::TooFewRows, std::to_string(table.n_rows()));
  if (table.n_rows() >= limits.max_exclusive) return reject(RejectReason::TooManyRows, std::to_string(table.n_rows()));
  if (table.n_cols() <= limits.min_exclusive) return reject(RejectReason::TooFewCols, std::to_string(table.n_cols()));
  if (table.n_cols() >= limits.max_exclusive) return reject(RejectReason::TooManyCols, std::to_string(table.n_cols()));
  for (const auto& cell : table.grid().cells) {
    if (text::count_non_ascii_code_points(cell.raw_text) > limits.max_non_ascii) {
      return reject(RejectReason::TooManyNonAscii, to_a1({cell.row, cell.col}));
    }
    if (text::count_whitespace_tokens(cell.raw_text) > limits.max_tokens) {
      return reject(RejectReason::TooManyTokens, to_a1({cell.row, cell.col}));
    }
  }
  for (Side side : {Side::Left, Side::Top}) {
    if (table.tree(side).max_depth() > limits.max_levels) {
      return reject(RejectReason::TooDeep, std::string(to_string(side)) + " depth " +
                                               std::to_string(table.tree(side).max_depth()));
    }
  }
  return {};
}

// Admission straight from a document: tree-building failures become
// ExtractionFailed instead of propagating. JSON and schema errors still throw.
inline AdmitDecision admit_document(std::string_view bytes, const AdmitLimits& limits = {}) {
  const auto input = table_input_from_json(detail::parse_json(bytes));
  try {
    return admit_table(build_table(input), limits);
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::TreeCoverageGap:
      case ErrorCode::InvalidTree:
        return {RejectReason::ExtractionFailed, e.what()};
      default:
        throw;
    }
  }
}

}  // namespace hitab
