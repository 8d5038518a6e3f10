#pragma once

// Random exploration for denotation-consistent programs, with trigger-word
// pruning and partial-supervision constraints.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hitab/answer.hpp"
#include "hitab/formula.hpp"
#include "hitab/ingest.hpp"

namespace hitab {

enum class SearchMode { Weak, Partial };

constexpr std::string_view to_string(SearchMode m) { return m == SearchMode::Weak ? "weak" : "partial"; }

struct SearchConfig {
  int max_samples_per_item = 15000;
  int max_funcs = 6;
  std::uint64_t seed = 0;
  bool deactivate_order_relations = true;
  bool deactivate_k_gt_1 = true;
  SearchMode mode = SearchMode::Weak;
};

struct ConstraintReport {
  bool answer_correct = false;
  bool entity_ok = false;
  bool quantity_ok = false;
  bool operator_ok = false;
  int satisfied_count = 0;
  double reward = 0.0;

  bool buffer_eligible() const { return reward >= kBufferThreshold - 1e-9; }
  static constexpr double kConstraintBonus = 0.2;
  static constexpr double kBufferThreshold = 1.4;
};

namespace text {

inline const std::set<std::string, std::less<>>& stop_words() {
  static const std::set<std::string, std::less<>> words = {
      "a",     "about", "after", "all",   "also",  "an",    "and",   "any",   "are",   "as",    "at",
      "be",    "been",  "being", "both",  "but",   "by",    "can",   "could", "did",   "do",    "does",
      "during", "each", "ever",  "for",   "from",  "had",   "has",   "have",  "he",    "her",   "his",
      "how",   "if",    "in",    "into",  "is",    "it",    "its",   "many",  "much",  "never", "not",
      "of",    "on",    "or",    "other", "over",  "per",   "she",   "so",    "such",  "than",  "that",
      "the",   "their", "them",  "then",  "there", "these", "they",  "this",  "those", "to",    "under",
      "up",    "was",   "we",    "were",  "what",  "when",  "where", "whether", "which", "while", "who",
      "whom",  "whose", "why",   "will",  "with",  "would", "you",   "your",  "among", "between",
      "'s",    "s",     "-",     "&",
  };
  return words;
}

inline bool is_stop_word(std::string_view tok) { return stop_words().contains(tok); }

// Lexical stand-in for comparative / superlative part-of-speech tags.
inline bool is_comparative(std::string_view tok) {
  static const std::set<std::string, std::less<>> cues = {"more", "less", "fewer", "better", "worse"};
  static const std::set<std::string, std::less<>> not_cues = {
      "number", "another", "however", "either", "neither", "together", "member", "quarter", "order",
      "water",  "paper",   "power",   "center", "offer",  "answer",   "register", "cancer", "computer",
      "manager", "officer", "worker", "teacher", "farmer", "partner", "october", "november", "december",
      "september", "summer", "winter", "border", "gender", "matter", "letter", "chapter", "character",
      "consumer", "provider", "customer", "user", "driver", "owner", "leader", "player", "cluster",
      "semester", "master", "minister", "officer", "soldier", "daughter", "mother", "father", "brother",
      "sister", "proper", "former", "after", "under", "over", "ever", "never", "other", "per", "her",
      "whether"};
  if (cues.contains(tok)) return true;
  if (tok.size() <= 3 || is_stop_word(tok) || not_cues.contains(tok)) return false;
  return tok.ends_with("er");
}

inline bool is_superlative_cue(std::string_view tok) {
  static const std::set<std::string, std::less<>> cues = {"most", "least", "fewest", "best", "worst"};
  static const std::set<std::string, std::less<>> not_cues = {
      "interest", "forest", "test", "rest", "west", "request", "nest", "guest", "contest", "protest",
      "harvest", "honest", "modest", "suggest", "invest", "arrest", "digest", "manifest", "interests"};
  if (cues.contains(tok)) return true;
  if (tok.size() <= 4 || is_stop_word(tok) || not_cues.contains(tok)) return false;
  return tok.ends_with("est");
}

// Whether `needle` occurs as a contiguous token run inside `hay`.
inline bool contains_tokens(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

}  // namespace text

struct HeaderMatch {
  NodeRef node;
  int length = 0;  // longest shared n-gram, 1..3
};

// Header nodes sharing an n-gram (n <= 3, no stop-word unigrams) with the
// question; longest match first, then left before top in document order.
inline std::vector<HeaderMatch> match_headers(std::string_view question, const HierTable& table) {
  const auto q = text::word_tokens(question);
  std::set<std::vector<std::string>> grams;
  for (std::size_t n = 1; n <= 3; ++n) {
    for (std::size_t i = 0; i + n <= q.size(); ++i) grams.insert({q.begin() + i, q.begin() + i + n});
  }
  std::vector<HeaderMatch> out;
  for (Side side : {Side::Left, Side::Top}) {
    for (const auto& node : table.tree(side).nodes()) {
      if (!node.cell) continue;
      const auto h = text::word_tokens(node.text);
      int best = 0;
      for (std::size_t n = std::min<std::size_t>(3, h.size()); n >= 1 && best == 0; --n) {
        for (std::size_t i = 0; i + n <= h.size(); ++i) {
          std::vector<std::string> g(h.begin() + i, h.begin() + i + n);
          if (n == 1 && text::is_stop_word(g.front())) continue;
          if (grams.contains(g)) {
            best = static_cast<int>(n);
            break;
          }
        }
      }
      if (best > 0) out.push_back({{side, node.node_id}, best});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const HeaderMatch& a, const HeaderMatch& b) { return a.length > b.length; });
  return out;
}

inline std::vector<NodeRef> candidate_headers(std::string_view question, const HierTable& table) {
  std::vector<NodeRef> out;
  for (const auto& m : match_headers(question, table)) out.push_back(m.node);
  return out;
}

// Region operators whose trigger words occur in the question; filters are
// always allowed.
inline std::set<FuncKind> allowed_operators(std::string_view question, const SearchConfig& config) {
  const auto tokens = text::word_tokens(question);
  auto has = [&](std::initializer_list<std::string_view> words) {
    return std::any_of(tokens.begin(), tokens.end(), [&](const std::string& t) {
      return std::find(words.begin(), words.end(), t) != words.end();
    });
  };
  const bool comparative = std::any_of(tokens.begin(), tokens.end(), [](const auto& t) { return text::is_comparative(t); });
  const bool superlative =
      std::any_of(tokens.begin(), tokens.end(), [](const auto& t) { return text::is_superlative_cue(t); });

  std::set<FuncKind> out = {FuncKind::FilterTree, FuncKind::FilterLevel};
  if (comparative || superlative || has({"top", "first", "bottom", "last"})) {
    out.insert({FuncKind::Argmax, FuncKind::Argmin});
  }
  if (superlative) out.insert({FuncKind::Max, FuncKind::Min});
  if (has({"average", "mean"})) out.insert(FuncKind::Average);
  if (has({"all", "combine", "combined", "total", "sum"})) out.insert(FuncKind::Sum);
  if (has({"how", "many", "total", "number"})) out.insert(FuncKind::Count);
  if (comparative || has({"difference", "more", "than", "change", "compare"})) {
    out.insert({FuncKind::Difference, FuncKind::DifferenceRate, FuncKind::DifferenceRateRev});
  }
  if (has({"times", "percent", "percentage", "fraction"})) out.insert({FuncKind::Proportion, FuncKind::ProportionRev});
  if (has({"negative", "opposite", "minus", "decrease", "decreased", "decline", "declined", "drop", "dropped",
           "fell", "loss"})) {
    out.insert(FuncKind::Opposite);
  }
  if (!config.deactivate_order_relations &&
      (comparative || has({"than", "greater", "above", "below", "over", "under", "equal", "exceed", "exceeded",
                           "least", "most"}))) {
    out.insert({FuncKind::GreaterThan, FuncKind::GreaterEqThan, FuncKind::LessThan, FuncKind::LessEqThan,
                FuncKind::Eq, FuncKind::NotEq});
  }
  return out;
}

namespace detail {

inline std::vector<std::string> question_tokens(std::string_view q) { return text::word_tokens(q); }

inline bool mention_in_question(const std::vector<std::string>& q, std::string_view mention) {
  return text::contains_tokens(q, text::word_tokens(mention));
}

// Region-operator kinds that agree with an annotated label list; nullopt
// means "no operator" (plain selection), an empty set means nothing agrees.
inline std::optional<std::set<FuncKind>> kinds_for_labels(const std::vector<OperatorLabel>& labels) {
  if (labels.empty()) return std::nullopt;
  const bool div_then_diff =
      labels.size() >= 2 && labels[0] == OperatorLabel::Div && labels[1] == OperatorLabel::Diff;
  if (div_then_diff) return std::set<FuncKind>{FuncKind::DifferenceRate, FuncKind::DifferenceRateRev};
  switch (labels.front()) {
    case OperatorLabel::Opposite: return std::set<FuncKind>{FuncKind::Opposite};
    case OperatorLabel::Sum: return std::set<FuncKind>{FuncKind::Sum};
    case OperatorLabel::Average: return std::set<FuncKind>{FuncKind::Average};
    case OperatorLabel::Max: return std::set<FuncKind>{FuncKind::Max};
    case OperatorLabel::Min: return std::set<FuncKind>{FuncKind::Min};
    case OperatorLabel::Count: return std::set<FuncKind>{FuncKind::Count};
    case OperatorLabel::Diff: return std::set<FuncKind>{FuncKind::Difference};
    case OperatorLabel::Div: return std::set<FuncKind>{FuncKind::Proportion, FuncKind::ProportionRev};
    case OperatorLabel::KthArgmax:
    case OperatorLabel::PairArgmax: return std::set<FuncKind>{FuncKind::Argmax};
    case OperatorLabel::KthArgmin:
    case OperatorLabel::PairArgmin: return std::set<FuncKind>{FuncKind::Argmin};
    case OperatorLabel::Percent: return std::set<FuncKind>{};
  }
  return std::set<FuncKind>{};
}

// Operator labels annotated on a sample: the formula when present, else the
// stored operator list. nullopt when neither is annotated.
inline std::optional<std::vector<OperatorLabel>> annotated_labels(const Sample& s) {
  if (s.formula) {
    try {
      return annotation_alignment(*s.formula).operators;
    } catch (const Error&) {
      return std::nullopt;
    }
  }
  if (s.operators) {
    std::vector<OperatorLabel> out;
    for (const auto& name : *s.operators) {
      if (auto l = parse_operator_label(name)) out.push_back(*l);
    }
    return out;
  }
  return std::nullopt;
}

}  // namespace detail

// A missing or question-irrelevant annotation leaves its constraint unmet.
inline ConstraintReport score_constraints(const ExecTrace& trace, const Sample& sample, const HierTable& table,
                                          bool answer_correct) {
  ConstraintReport rep;
  rep.answer_correct = answer_correct;
  const auto q = detail::question_tokens(sample.question);

  std::vector<NodeRef> linked;
  for (const auto& l : sample.entity_links) {
    if (!detail::mention_in_question(q, l.mention)) continue;
    if (auto ref = table.header_at(l.cell)) linked.push_back(*ref);
  }
  rep.entity_ok = !linked.empty() && std::all_of(linked.begin(), linked.end(), [&](NodeRef r) {
    return std::find(trace.filtered_nodes.begin(), trace.filtered_nodes.end(), r) != trace.filtered_nodes.end();
  });

  std::vector<CellCoord> quantity_cells;
  for (const auto& l : sample.quantity_links) {
    if (!detail::mention_in_question(q, l.mention)) continue;
    std::vector<CellCoord> cells;
    if (l.cell) cells.push_back(*l.cell);
    if (l.formula) {
      try {
        cells = annotation_alignment(*l.formula).cells;
      } catch (const Error&) {
        cells.clear();
      }
    }
    for (auto c : cells) {
      if (table.is_data_cell(c)) quantity_cells.push_back(c);
    }
  }
  auto inside = [&](CellCoord c) {
    const int dr = c.row - table.top_header_rows(), dc = c.col - table.left_header_cols();
    const auto& rows = trace.selected.rows;
    const auto& cols = trace.selected.cols;
    return std::binary_search(rows.begin(), rows.end(), dr) && std::binary_search(cols.begin(), cols.end(), dc);
  };
  rep.quantity_ok = !quantity_cells.empty() && std::all_of(quantity_cells.begin(), quantity_cells.end(), inside);

  if (const auto labels = detail::annotated_labels(sample)) {
    const auto kinds = detail::kinds_for_labels(*labels);
    rep.operator_ok = kinds ? (trace.op && kinds->contains(*trace.op)) : !trace.op.has_value();
  }

  rep.satisfied_count = int(rep.entity_ok) + int(rep.quantity_ok) + int(rep.operator_ok);
  rep.reward = (answer_correct ? 1.0 : 0.0) + ConstraintReport::kConstraintBonus * rep.satisfied_count;
  return rep;
}

struct SearchResult {
  Program program;
  std::string text;
  BoundProgram bound;
  ConstraintReport report;
  ExecTrace trace;
  std::size_t discovery = 0;  // draw index of the first time this text was found
};

struct SearchOutcome {
  std::vector<SearchResult> results;
  std::size_t draws = 0;
  std::size_t executed = 0;    // drawn programs that ran without error
  std::size_t consistent = 0;  // executed programs matching the gold answer (with repeats)
};

namespace detail {

struct Sampler {
  const HierTable& table;
  const SearchConfig& config;
  std::vector<HeaderMatch> left, top;
  std::vector<FuncKind> ops;
  std::vector<double> numbers;
  std::mt19937_64 rng;

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  bool coin() { return uniform(0, 1) == 1; }

  std::vector<NodeRef> pick_headers(const std::vector<HeaderMatch>& cands, const std::set<NodeRef>& used) {
    std::vector<const HeaderMatch*> pool;
    for (const auto& m : cands) {
      if (!used.contains(m.node)) pool.push_back(&m);
    }
    const std::size_t want = (pool.size() >= 2 && coin()) ? 2 : 1;
    std::vector<NodeRef> out;
    while (out.size() < want && !pool.empty()) {
      int total = 0;
      for (auto* m : pool) total += m->length;
      int ticket = uniform(0, total - 1);
      std::size_t i = 0;
      while (ticket >= pool[i]->length) ticket -= pool[i++]->length;
      out.push_back(pool[i]->node);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(i));
    }
    return out;
  }

  bool has_unused(const std::vector<HeaderMatch>& cands, const std::set<NodeRef>& used) const {
    return std::any_of(cands.begin(), cands.end(), [&](const HeaderMatch& m) { return !used.contains(m.node); });
  }

  Level random_level(Side side) { return {side, uniform(1, std::max(1, table.tree(side).max_depth()))}; }

  Func random_operator() {
    Func f;
    f.kind = ops[static_cast<std::size_t>(uniform(0, static_cast<int>(ops.size()) - 1))];
    if (takes_level(f.kind)) f.level = random_level(coin() ? Side::Left : Side::Top);
    if (is_superlative(f.kind)) f.k = config.deactivate_k_gt_1 ? 1 : uniform(1, 3);
    if (is_order_filter(f.kind)) f.n = numbers[static_cast<std::size_t>(uniform(0, static_cast<int>(numbers.size()) - 1))];
    return f;
  }

  BoundProgram draw() {
    enum Step { LTree, LLevel, TTree, TLevel, Op, Stop };
    enum State { Start, LeftPending, AfterLeft, TopPending, AfterTop, Done };
    BoundProgram bp;
    std::set<NodeRef> used;
    State state = Start;
    const int max = config.max_funcs;
    while (state != Done) {
      const int len = static_cast<int>(bp.funcs.size());
      std::vector<Step> steps;
      const bool room_tree = len + 2 <= max;
      const bool room_one = len + 1 <= max;
      switch (state) {
        case Start:
          if (room_tree && has_unused(left, used)) steps.push_back(LTree);
          if (room_one) steps.push_back(LLevel);
          if (room_tree && has_unused(top, used)) steps.push_back(TTree);
          if (room_one) steps.push_back(TLevel);
          if (room_one && !ops.empty()) steps.push_back(Op);
          steps.push_back(Stop);
          break;
        case LeftPending:
          if (room_tree && has_unused(left, used)) steps.push_back(LTree);
          steps.push_back(LLevel);
          break;
        case AfterLeft:
          if (room_tree && has_unused(top, used)) steps.push_back(TTree);
          if (room_one) steps.push_back(TLevel);
          if (room_one && !ops.empty()) steps.push_back(Op);
          steps.push_back(Stop);
          break;
        case TopPending:
          if (room_tree && has_unused(top, used)) steps.push_back(TTree);
          steps.push_back(TLevel);
          break;
        case AfterTop:
          if (room_one && !ops.empty()) steps.push_back(Op);
          steps.push_back(Stop);
          break;
        case Done: break;
      }
      const Step step = steps[static_cast<std::size_t>(uniform(0, static_cast<int>(steps.size()) - 1))];
      BoundFunc bf;
      switch (step) {
        case LTree:
        case TTree: {
          bf.func.kind = FuncKind::FilterTree;
          bf.nodes = pick_headers(step == LTree ? left : top, used);
          used.insert(bf.nodes.begin(), bf.nodes.end());
          for (auto r : bf.nodes) bf.func.headers.push_back(table.node(r).text);
          state = step == LTree ? LeftPending : TopPending;
          break;
        }
        case LLevel:
        case TLevel:
          bf.func.kind = FuncKind::FilterLevel;
          bf.func.level = random_level(step == LLevel ? Side::Left : Side::Top);
          state = step == LLevel ? AfterLeft : AfterTop;
          break;
        case Op:
          bf.func = random_operator();
          state = Done;
          break;
        case Stop: state = Done; continue;
      }
      bp.funcs.push_back(std::move(bf));
    }
    return bp;
  }
};

inline std::vector<double> question_numbers(std::string_view question) {
  std::vector<double> out;
  for (const auto& tok : text::word_tokens(question)) {
    const auto v = normalize_quantity(tok);
    if (v.is_number() && std::find(out.begin(), out.end(), v.as_number()) == out.end()) out.push_back(v.as_number());
  }
  return out;
}

inline std::uint64_t search_seed(std::uint64_t seed, std::string_view sample_id) {
  std::uint64_t h = text::fnv1a(sample_id);
  h ^= seed + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

}  // namespace detail

inline bool is_better_result(const SearchResult& a, const SearchResult& b) {
  if (a.report.reward != b.report.reward) return a.report.reward > b.report.reward;
  if (a.program.funcs.size() != b.program.funcs.size()) return a.program.funcs.size() < b.program.funcs.size();
  return a.discovery < b.discovery;
}

// Deterministic for a given (sample id, table, config). Weak and partial
// modes draw the same program stream; partial keeps the subset meeting at
// least two constraints.
inline SearchOutcome random_search(const Sample& sample, const HierTable& table, const SearchConfig& config) {
  if (config.max_samples_per_item <= 0) fail(ErrorCode::SchemaViolation, "max_samples_per_item must be positive");
  SearchOutcome outcome;
  if (sample.answers.empty()) return outcome;

  detail::Sampler sampler{table, config, {}, {}, {}, detail::question_numbers(sample.question),
                          std::mt19937_64(detail::search_seed(config.seed, sample.sample_id))};
  for (const auto& m : match_headers(sample.question, table)) (m.node.side == Side::Left ? sampler.left : sampler.top).push_back(m);
  for (auto k : allowed_operators(sample.question, config)) {
    if (!is_region_op(k)) continue;
    if (is_order_filter(k) && sampler.numbers.empty()) continue;
    sampler.ops.push_back(k);
  }

  std::unordered_map<std::string, std::size_t> index;
  for (int draw = 0; draw < config.max_samples_per_item; ++draw) {
    ++outcome.draws;
    auto bp = sampler.draw();
    ExecTrace trace;
    ExecValue value;
    try {
      value = execute_traced(bp, table, &trace);
    } catch (const Error&) {
      continue;
    }
    ++outcome.executed;
    if (!match_answer(value, table, sample.answers)) continue;
    ++outcome.consistent;
    auto report = score_constraints(trace, sample, table, true);
    if (config.mode == SearchMode::Partial && report.satisfied_count < 2) continue;
    SearchResult r;
    r.program = unbind(bp, table);
    r.text = render_program(r.program);
    r.bound = std::move(bp);
    r.report = report;
    r.trace = std::move(trace);
    r.discovery = static_cast<std::size_t>(draw);
    if (auto it = index.find(r.text); it != index.end()) {
      auto& kept = outcome.results[it->second];
      if (r.report.reward > kept.report.reward) {
        r.discovery = kept.discovery;
        kept = std::move(r);
      }
      continue;
    }
    index.emplace(r.text, outcome.results.size());
    outcome.results.push_back(std::move(r));
  }
  std::stable_sort(outcome.results.begin(), outcome.results.end(), is_better_result);
  return outcome;
}

struct SearchStats {
  std::size_t samples = 0;
  double mean_consistent = 0.0;
  double coverage = 0.0;
  std::map<std::size_t, std::size_t> by_length;
  std::map<std::string, std::size_t> by_operator;
};

inline SearchStats search_stats(const std::vector<SearchOutcome>& outcomes) {
  SearchStats s;
  s.samples = outcomes.size();
  if (outcomes.empty()) return s;
  std::size_t total = 0, covered = 0;
  for (const auto& o : outcomes) {
    total += o.results.size();
    if (!o.results.empty()) ++covered;
    for (const auto& r : o.results) {
      ++s.by_length[r.program.funcs.size()];
      const auto op = region_operator(r.program);
      ++s.by_operator[op ? std::string(to_string(*op)) : "none"];
    }
  }
  s.mean_consistent = static_cast<double>(total) / static_cast<double>(outcomes.size());
  s.coverage = static_cast<double>(covered) / static_cast<double>(outcomes.size());
  return s;
}

inline Json search_result_json(const std::string& sample_id, const SearchOutcome& o) {
  Json programs = Json::array();
  for (const auto& r : o.results) {
    Json satisfied = Json::array();
    if (r.report.entity_ok) satisfied.push_back("entity");
    if (r.report.quantity_ok) satisfied.push_back("quantity");
    if (r.report.operator_ok) satisfied.push_back("operator");
    programs.push_back({{"text", r.text}, {"reward", r.report.reward}, {"satisfied", satisfied}});
  }
  return {{"sample_id", sample_id},
          {"programs", programs},
          {"stats", {{"draws", o.draws}, {"executed", o.executed}, {"consistent", o.consistent}}}};
}

inline Json search_stats_json(const SearchStats& s) {
  Json by_length = Json::object(), by_op = Json::object();
  for (const auto& [len, n] : s.by_length) by_length[std::to_string(len)] = n;
  for (const auto& [op, n] : s.by_operator) by_op[op] = n;
  return {{"samples", s.samples},
          {"mean_consistent", s.mean_consistent},
          {"coverage", s.coverage},
          {"by_length", by_length},
          {"by_operator", by_op}};
}

}  // namespace hitab
