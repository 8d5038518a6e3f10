#include <gtest/gtest.h>

#include <set>

#include "support/fixtures.hpp"
#include "support/random_case.hpp"

using namespace hitab;
using namespace hitab::testing;

namespace {

const char* kGoldCellProgram =
    "(filter_tree 2012) (filter_tree china) (filter_level LEFT_2) (filter_tree gdp) (filter_level TOP_1)";

Sample f1_sample(std::string id, std::string question, std::vector<CellValue> answers) {
  Sample s;
  s.sample_id = std::move(id);
  s.table_id = "f1";
  s.question = std::move(question);
  s.answers = std::move(answers);
  return s;
}

std::set<std::string> texts(const SearchOutcome& o) {
  std::set<std::string> out;
  for (const auto& r : o.results) out.insert(r.text);
  return out;
}

// F1 with china's 2013 gdp equal to its 2012 gdp.
HierTable duplicate_f1() {
  auto in = f1_input();
  in.cells[5][1] = "8.5";
  return build_table(in);
}

Sample linked_cell_sample() {
  auto s = f1_sample("dup", "What is the GDP of China in 2012?", {CellValue::number(8.5)});
  s.entity_links = {{"2012", {1, 0}}, {"china", {2, 0}}, {"gdp", {0, 1}}};
  s.formula = "=B3";
  return s;
}

struct RandomSample {
  HierTable table;
  Sample sample;
};

// A question naming a data cell's headers plus random trigger words; the
// gold answer is that cell's value.
std::optional<RandomSample> random_sample(CaseGenerator& gen, int i) {
  static const std::vector<std::string> triggers = {"highest", "total", "how many", "difference", "average",
                                                   "more than", "percent", "decline", "lowest", "sum"};
  auto t = build_table(gen.table().input);
  const int r = gen.uniform(0, t.data_row_count() - 1), c = gen.uniform(0, t.data_col_count() - 1);
  const auto& v = t.data_cell(r, c).value;
  if (!v.is_number()) return std::nullopt;
  Sample s;
  s.sample_id = "rand-" + std::to_string(i);
  s.question = t.left_tree().node(t.left_tree().owner(r)).text + " " + t.top_tree().node(t.top_tree().owner(c)).text +
               " " + triggers[static_cast<std::size_t>(gen.uniform(0, 9))] + " " + std::to_string(gen.uniform(0, 9));
  s.answers = {v};
  s.entity_links = {{t.node({Side::Left, t.left_tree().owner(r)}).text, *t.node({Side::Left, t.left_tree().owner(r)}).cell}};
  s.formula = "=" + to_a1(t.grid_coord(r, c));
  return RandomSample{std::move(t), std::move(s)};
}

}  // namespace

TEST(CandidateHeaders, CellSelectionQuestion) {
  const auto t = f1();
  const auto c = candidate_headers("What is the GDP of China in 2012?", t);
  const std::set<NodeRef> got(c.begin(), c.end());
  const std::set<NodeRef> want = {left_node(t, 1), left_node(t, 2), left_node(t, 5), top_node(t, 1)};
  EXPECT_EQ(got, want);
  EXPECT_EQ(c.size(), 4u);
}

TEST(CandidateHeaders, NoOverlap) { EXPECT_TRUE(candidate_headers("Where is the moon?", f1()).empty()); }

TEST(CandidateHeaders, DifferenceQuestion) {
  const auto t = f1();
  const auto c = candidate_headers("u.s. gdp higher than china in 2013", t);
  const std::set<NodeRef> got(c.begin(), c.end());
  const std::set<NodeRef> want = {left_node(t, 3), left_node(t, 6), left_node(t, 2), left_node(t, 5),
                                  top_node(t, 1), left_node(t, 4)};
  EXPECT_EQ(got, want);
}

TEST(CandidateHeaders, LongerMatchesRankFirst) {
  const auto t = grid_table({{"", "gdp", "gdp per capita"}, {"x", "1", "2"}});
  const auto m = match_headers("gdp per capita of x", t);
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(t.node(m[0].node).text, "gdp per capita");
  EXPECT_EQ(m[0].length, 3);
  EXPECT_EQ(m[1].length, 1);
}

TEST(AllowedOperators, Triggers) {
  const SearchConfig cfg;
  const auto sup = allowed_operators("Which country has the highest GDP in 2012?", cfg);
  EXPECT_TRUE(sup.contains(FuncKind::Argmax));
  EXPECT_TRUE(sup.contains(FuncKind::Argmin));
  EXPECT_EQ(allowed_operators("What is the GDP of China?", cfg),
            (std::set<FuncKind>{FuncKind::FilterTree, FuncKind::FilterLevel}));
  EXPECT_TRUE(allowed_operators("How many provinces reported?", cfg).contains(FuncKind::Count));
  EXPECT_TRUE(allowed_operators("what is the average income", cfg).contains(FuncKind::Average));
  EXPECT_TRUE(allowed_operators("combined total of a and b", cfg).contains(FuncKind::Sum));
  EXPECT_TRUE(allowed_operators("how much more is x than y", cfg).contains(FuncKind::Difference));
  EXPECT_TRUE(allowed_operators("what percent of x is y", cfg).contains(FuncKind::Proportion));
  EXPECT_FALSE(allowed_operators("the interest rate in the west", cfg).contains(FuncKind::Argmax));
  EXPECT_FALSE(allowed_operators("number of members", cfg).contains(FuncKind::Difference));
}

TEST(AllowedOperators, OrderRelationsOnlyWhenActivated) {
  SearchConfig cfg;
  const auto q = "which countries had gdp greater than 10";
  for (auto k : allowed_operators(q, cfg)) EXPECT_FALSE(is_order_filter(k));
  cfg.deactivate_order_relations = false;
  EXPECT_TRUE(allowed_operators(q, cfg).contains(FuncKind::GreaterThan));
}

TEST(RandomSearch, FindsGoldCellProgram) {
  const auto t = f1();
  const auto s = f1_sample("cell", "What is the GDP of China in 2012?", {CellValue::number(8.5)});
  const auto o = random_search(s, t, SearchConfig{});
  EXPECT_TRUE(texts(o).contains(kGoldCellProgram));
  EXPECT_EQ(o.draws, 15000u);
  for (const auto& r : o.results) EXPECT_FALSE(region_operator(r.program));
}

TEST(RandomSearch, UnreachableAnswerGivesNothing) {
  const auto t = f1();
  EXPECT_TRUE(random_search(f1_sample("none", "What is the GDP of China in 2012?", {CellValue::number(123456)}), t,
                            SearchConfig{})
                  .results.empty());
  EXPECT_TRUE(random_search(f1_sample("empty", "gdp", {}), t, SearchConfig{}).results.empty());
}

TEST(RandomSearch, SpuriousFixture) {
  const auto t = duplicate_f1();
  const auto s = linked_cell_sample();
  SearchConfig cfg;
  const auto weak = random_search(s, t, cfg);
  EXPECT_GE(weak.results.size(), 2u);
  cfg.mode = SearchMode::Partial;
  const auto partial = random_search(s, t, cfg);
  ASSERT_FALSE(partial.results.empty());
  const auto gold = region_of({1}, {0});
  for (const auto& r : partial.results) {
    EXPECT_EQ(r.trace.selected.rows, gold.rows) << r.text;
    EXPECT_EQ(r.trace.selected.cols, gold.cols) << r.text;
  }
  EXPECT_TRUE(texts(partial).contains(kGoldCellProgram));
  // Weak mode keeps programs that skip the linked year; their text binds
  // either china node.
  bool unlinked = false;
  for (const auto& r : weak.results) unlinked |= !r.report.entity_ok;
  EXPECT_TRUE(unlinked);
}

TEST(RandomSearch, RejectsNonPositiveBudget) {
  SearchConfig cfg;
  cfg.max_samples_per_item = 0;
  EXPECT_THROW(random_search(linked_cell_sample(), f1(), cfg), Error);
}

TEST(ScoreConstraints, GoldAlignedProgram) {
  const auto t = f1();
  auto s = f1_sample("diff", "How much more is U.S. GDP higher than China in 2013?", {CellValue::number(7.2)});
  s.entity_links = {{"u.s.", {6, 0}}, {"china", {5, 0}}, {"gdp", {0, 1}}};
  s.quantity_links = {{"how much more", "=B7-B6", std::nullopt}};
  s.formula = "=B7-B6";
  ExecTrace trace;
  const auto v = execute(parse_program("(filter_tree u.s. china) (filter_level LEFT_2) (filter_tree gdp) "
                                       "(filter_level TOP_1) (difference)"),
                         t, s.question, &trace);
  const auto rep = score_constraints(trace, s, t, match_answer(v, t, s.answers));
  EXPECT_TRUE(rep.answer_correct);
  EXPECT_TRUE(rep.entity_ok);
  EXPECT_TRUE(rep.quantity_ok);
  EXPECT_TRUE(rep.operator_ok);
  EXPECT_EQ(rep.satisfied_count, 3);
  EXPECT_DOUBLE_EQ(rep.reward, 1.6);
  EXPECT_TRUE(rep.buffer_eligible());
}

TEST(ScoreConstraints, UnlinkedHeaderBoundary) {
  const auto t = f1();
  auto s = linked_cell_sample();
  s.quantity_links = {{"gdp", std::nullopt, CellCoord{2, 1}}};
  ExecTrace trace;
  const auto v =
      execute(parse_program("(filter_tree china) (filter_level LEFT_2) (filter_tree gdp) (filter_level TOP_1)"), t,
              s.question, &trace);
  const auto rep = score_constraints(trace, s, t, match_answer(v, t, s.answers));
  EXPECT_TRUE(rep.answer_correct);
  EXPECT_FALSE(rep.entity_ok);
  EXPECT_TRUE(rep.quantity_ok);
  EXPECT_TRUE(rep.operator_ok);
  EXPECT_NEAR(rep.reward, 1.4, 1e-12);
  EXPECT_TRUE(rep.buffer_eligible());
}

TEST(ScoreConstraints, WrongAnswerIsIneligible) {
  const auto t = f1();
  const auto s = linked_cell_sample();
  ExecTrace trace;
  execute(parse_program(kGoldCellProgram), t, s.question, &trace);
  const auto rep = score_constraints(trace, s, t, false);
  EXPECT_LE(rep.reward, 0.6 + 1e-12);
  EXPECT_FALSE(rep.buffer_eligible());
}

TEST(ScoreConstraints, MissingAnnotationsAreUnmet) {
  const auto t = f1();
  const auto s = f1_sample("bare", "What is the GDP of China in 2012?", {CellValue::number(8.5)});
  ExecTrace trace;
  execute(parse_program(kGoldCellProgram), t, s.question, &trace);
  const auto rep = score_constraints(trace, s, t, true);
  EXPECT_EQ(rep.satisfied_count, 0);
  EXPECT_DOUBLE_EQ(rep.reward, 1.0);
}

TEST(ScoreConstraints, LinksOutsideTheQuestionAreIgnored) {
  const auto t = f1();
  auto s = linked_cell_sample();
  s.entity_links.push_back({"population", {0, 2}});
  ExecTrace trace;
  execute(parse_program(kGoldCellProgram), t, s.question, &trace);
  EXPECT_TRUE(score_constraints(trace, s, t, true).entity_ok);
}

TEST(ScoreConstraints, OperatorFallsBackToOperatorList) {
  const auto t = f1();
  auto s = f1_sample("ops", "Which country has the highest GDP in 2012?", {CellValue::text("u.s.")});
  s.operators = std::vector<std::string>{"kth-argmax"};
  ExecTrace trace;
  execute(parse_program("(filter_tree 2012) (filter_level LEFT_2) (filter_tree gdp) (filter_level TOP_1) (argmax 1)"),
          t, s.question, &trace);
  EXPECT_TRUE(score_constraints(trace, s, t, true).operator_ok);
  s.operators = std::vector<std::string>{"sum"};
  EXPECT_FALSE(score_constraints(trace, s, t, true).operator_ok);
}

TEST(SearchStats, PartialMeanAtMostWeak) {
  CaseGenerator gen(606);
  std::vector<SearchOutcome> weak, partial;
  SearchConfig cfg;
  cfg.max_samples_per_item = 300;
  for (int i = 0; i < 120; ++i) {
    auto rs = random_sample(gen, i);
    if (!rs) continue;
    cfg.mode = SearchMode::Weak;
    weak.push_back(random_search(rs->sample, rs->table, cfg));
    cfg.mode = SearchMode::Partial;
    partial.push_back(random_search(rs->sample, rs->table, cfg));
  }
  const auto w = search_stats(weak), p = search_stats(partial);
  EXPECT_GT(w.samples, 20u);
  EXPECT_GT(w.mean_consistent, 0.0);
  EXPECT_LE(p.mean_consistent, w.mean_consistent);
  EXPECT_LE(p.coverage, w.coverage);
  std::size_t hist = 0;
  for (const auto& [len, n] : w.by_length) hist += n;
  EXPECT_DOUBLE_EQ(static_cast<double>(hist), w.mean_consistent * static_cast<double>(w.samples));
}

TEST(SearchStats, EmptySet) {
  const auto s = search_stats({});
  EXPECT_EQ(s.samples, 0u);
  EXPECT_EQ(s.mean_consistent, 0.0);
  EXPECT_EQ(s.coverage, 0.0);
  EXPECT_TRUE(s.by_length.empty());
}

TEST(SearchProperties, PartialSubsetDeterministicAndSound) {
  CaseGenerator gen(707);
  SearchConfig cfg;
  cfg.max_samples_per_item = 400;
  int checked = 0;
  for (int i = 0; i < 150; ++i) {
    auto rs = random_sample(gen, i);
    if (!rs) continue;
    const auto& t = rs->table;
    const auto& s = rs->sample;
    cfg.mode = SearchMode::Weak;
    const auto weak = random_search(s, t, cfg);
    const auto again = random_search(s, t, cfg);
    ASSERT_EQ(weak.results.size(), again.results.size());
    for (std::size_t k = 0; k < weak.results.size(); ++k) {
      EXPECT_EQ(weak.results[k].text, again.results[k].text);
      EXPECT_EQ(weak.results[k].report.reward, again.results[k].report.reward);
    }
    cfg.mode = SearchMode::Partial;
    const auto partial = random_search(s, t, cfg);
    const auto wt = texts(weak);
    for (const auto& r : partial.results) {
      EXPECT_TRUE(wt.contains(r.text)) << r.text;
      EXPECT_GE(r.report.satisfied_count, 2);
    }
    for (const auto& r : weak.results) {
      ++checked;
      // Re-parses, obeys the grammar, avoids deactivated operators, and
      // re-executes to the gold answer.
      const auto p = parse_program(r.text);
      EXPECT_EQ(p, r.program);
      const auto op = region_operator(p);
      if (op) {
        EXPECT_FALSE(is_order_filter(*op));
        if (is_superlative(*op)) EXPECT_EQ(p.funcs.back().k, 1);
      }
      EXPECT_LE(p.funcs.size(), 6u);
      EXPECT_TRUE(match_answer(execute(r.bound, t), t, s.answers)) << r.text;
    }
    for (std::size_t k = 1; k < weak.results.size(); ++k) {
      EXPECT_FALSE(is_better_result(weak.results[k], weak.results[k - 1]));
    }
  }
  EXPECT_GT(checked, 50);
}

TEST(SearchOutput, JsonShape) {
  const auto t = f1();
  SearchConfig cfg;
  cfg.max_samples_per_item = 2000;
  cfg.mode = SearchMode::Partial;
  const auto o = random_search(linked_cell_sample(), t, cfg);
  const auto j = search_result_json("dup", o);
  EXPECT_EQ(j["sample_id"], "dup");
  ASSERT_FALSE(j["programs"].empty());
  EXPECT_TRUE(j["programs"][0].contains("text"));
  EXPECT_TRUE(j["programs"][0]["satisfied"].is_array());
  EXPECT_EQ(j["stats"]["draws"], 2000);
}
