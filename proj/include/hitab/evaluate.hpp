#pragma once

// Execution accuracy and spurious-program rate over a sample set.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hitab/answer.hpp"
#include "hitab/ingest.hpp"

namespace hitab {

struct Prediction {
  std::string sample_id;
  std::optional<std::string> program;
  std::optional<std::vector<CellValue>> answer;
};

inline Prediction prediction_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("sample_id") || !j["sample_id"].is_string()) {
    fail(ErrorCode::SchemaViolation, "prediction needs a string 'sample_id'");
  }
  Prediction p;
  p.sample_id = j["sample_id"].get<std::string>();
  if (j.contains("program") && !j["program"].is_null()) {
    if (!j["program"].is_string()) fail(ErrorCode::SchemaViolation, "'program' must be a string");
    p.program = j["program"].get<std::string>();
  }
  if (j.contains("answer") && !j["answer"].is_null()) {
    std::vector<CellValue> values;
    if (j["answer"].is_array()) {
      for (const auto& v : j["answer"]) values.push_back(detail::value_from_json(v));
    } else {
      values.push_back(detail::value_from_json(j["answer"]));
    }
    p.answer = std::move(values);
  }
  if (!p.program && !p.answer) fail(ErrorCode::SchemaViolation, p.sample_id + ": prediction has neither program nor answer");
  return p;
}

inline std::vector<Prediction> load_predictions(std::string_view jsonl) {
  std::vector<Prediction> out;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    out.push_back(prediction_from_json(detail::parse_json(line)));
  }
  return out;
}

// Samples plus the tables they reference, keyed by table id.
struct Dataset {
  std::vector<Sample> samples;
  std::map<std::string, HierTable> tables;

  const HierTable& table_for(const Sample& s) const {
    auto it = tables.find(s.table_id);
    if (it == tables.end()) fail(ErrorCode::SchemaViolation, s.sample_id + ": unknown table '" + s.table_id + "'");
    return it->second;
  }
};

struct ResolvedProgram {
  BoundProgram bound;
  ExecTrace trace;
  ExecValue value;
};

inline ResolvedProgram resolve_program(std::string_view program_text, const Sample& s, const HierTable& t) {
  ResolvedProgram r;
  r.value = execute(parse_program(program_text), t, s.question, &r.trace, &r.bound);
  return r;
}

namespace detail {

inline std::map<std::string, const Sample*> index_samples(const Dataset& ds) {
  std::map<std::string, const Sample*> out;
  for (const auto& s : ds.samples) out.emplace(s.sample_id, &s);
  return out;
}

inline std::map<std::string, const Prediction*> index_predictions(const std::vector<Prediction>& preds,
                                                                  const std::map<std::string, const Sample*>& samples) {
  std::map<std::string, const Prediction*> out;
  for (const auto& p : preds) {
    if (!samples.contains(p.sample_id)) fail(ErrorCode::UnknownSampleId, "prediction for unknown sample '" + p.sample_id + "'");
    out[p.sample_id] = &p;
  }
  return out;
}

inline bool prediction_correct(const Prediction& p, const Sample& s, const HierTable& t) {
  if (p.answer) return match_answer(*p.answer, s.answers);
  try {
    return match_answer(resolve_program(*p.program, s, t).value, t, s.answers);
  } catch (const Error&) {
    return false;
  }
}

}  // namespace detail

// Fraction of dataset samples whose prediction matches gold; missing or
// failing predictions count as wrong.
inline double execution_accuracy(const std::vector<Prediction>& predictions, const Dataset& ds) {
  const auto samples = detail::index_samples(ds);
  const auto preds = detail::index_predictions(predictions, samples);
  if (ds.samples.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& s : ds.samples) {
    auto it = preds.find(s.sample_id);
    if (it != preds.end() && detail::prediction_correct(*it->second, s, ds.table_for(s))) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.samples.size());
}

// Same denotation path: identical bound program, or identical operator
// input region, operator call, and result.
inline bool same_reasoning(const ResolvedProgram& a, const ResolvedProgram& b, const HierTable& t) {
  if (a.bound == b.bound) return true;
  if (a.trace.selected.rows != b.trace.selected.rows || a.trace.selected.cols != b.trace.selected.cols) return false;
  if (a.trace.op != b.trace.op) return false;
  if (a.trace.op) {
    const auto& fa = a.bound.funcs.back().func;
    const auto& fb = b.bound.funcs.back().func;
    if (fa.level != fb.level || fa.k != fb.k || fa.n != fb.n) return false;
  }
  return match_answer(answer_values(a.value, t), answer_values(b.value, t));
}

// Among samples with correct program predictions, the fraction whose program
// reasons differently from the gold program.
inline double spurious_rate(const std::vector<Prediction>& predictions, const Dataset& ds,
                            const std::map<std::string, std::string>& gold_programs) {
  const auto samples = detail::index_samples(ds);
  const auto preds = detail::index_predictions(predictions, samples);
  std::size_t correct = 0, spurious = 0;
  for (const auto& [id, p] : preds) {
    if (!p->program) continue;
    const auto& s = *samples.at(id);
    const auto& t = ds.table_for(s);
    std::optional<ResolvedProgram> pred;
    try {
      pred = resolve_program(*p->program, s, t);
    } catch (const Error&) {
      continue;
    }
    if (!match_answer(pred->value, t, s.answers)) continue;
    auto gold = gold_programs.find(id);
    if (gold == gold_programs.end()) fail(ErrorCode::MissingGoldProgram, "no gold program for sample '" + id + "'");
    ++correct;
    const auto gold_resolved = resolve_program(gold->second, s, t);
    if (!same_reasoning(*pred, gold_resolved, t)) ++spurious;
  }
  return correct ? static_cast<double>(spurious) / static_cast<double>(correct) : 0.0;
}

inline std::map<std::string, std::string> load_gold_programs(std::string_view jsonl) {
  std::map<std::string, std::string> out;
  for (const auto& p : load_predictions(jsonl)) {
    if (!p.program) fail(ErrorCode::SchemaViolation, p.sample_id + ": gold entry lacks 'program'");
    out[p.sample_id] = *p.program;
  }
  return out;
}

}  // namespace hitab
