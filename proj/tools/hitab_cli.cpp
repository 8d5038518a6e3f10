// Command-line surface over the hitab headers.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "hitab/hitab.hpp"

namespace fs = std::filesystem;
using namespace hitab;

namespace {

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Every *.json file in the directory, keyed by table id.
std::map<std::string, HierTable> load_tables(const std::string& dir) {
  if (!fs::is_directory(dir)) throw DataError("'" + dir + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::map<std::string, HierTable> out;
  for (const auto& f : files) {
    auto t = load_table(read_file(f.string()));
    const auto id = t.table_id().empty() ? f.stem().string() : t.table_id();
    out.emplace(id, std::move(t));
  }
  return out;
}

Dataset load_dataset(const std::string& tables_dir, const std::string& samples_file) {
  Dataset ds;
  ds.tables = load_tables(tables_dir);
  ds.samples = load_samples(read_file(samples_file));
  for (const auto& s : ds.samples) validate_sample(s, ds.table_for(s));
  return ds;
}

// Index-ordered results from a worker pool; the first error is rethrown.
template <typename R, typename F>
std::vector<R> parallel_map(std::size_t n, int jobs, F&& f) {
  std::vector<R> out(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        out[i] = f(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, jobs));
  if (threads == 1 || n < 2) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

Json exec_value_json(const ExecValue& v, const HierTable& t) {
  static const char* kinds[] = {"region", "number", "headers", "grouped"};
  Json j;
  j["kind"] = kinds[v.index()];
  if (const auto* g = std::get_if<GroupedVal>(&v)) {
    Json groups = Json::object();
    for (const auto& [k, x] : g->entries) groups[k] = x;
    j["value"] = groups;
  } else {
    Json values = Json::array();
    for (const auto& c : answer_values(v, t)) values.push_back(detail::value_to_json(c));
    j["value"] = values;
  }
  if (const auto* r = std::get_if<RegionVal>(&v)) j["region"] = {{"rows", r->region.rows}, {"cols", r->region.cols}};
  j["text"] = render_exec_value(v, t);
  return j;
}

Json stats_json(const Dataset& ds) {
  std::map<std::string, std::size_t> ops, reasons;
  std::size_t admitted = 0, with_formula = 0;
  double left_depth = 0, top_depth = 0;
  for (const auto& [id, t] : ds.tables) {
    const auto d = admit_table(t);
    if (d.admitted()) {
      ++admitted;
    } else {
      ++reasons[std::string(to_string(*d.reject))];
    }
    left_depth += t.left_tree().max_depth();
    top_depth += t.top_tree().max_depth();
  }
  for (const auto& s : ds.samples) {
    if (!s.formula) continue;
    ++with_formula;
    try {
      const auto labels = extract_alignment(parse_formula(*s.formula)).operators;
      if (labels.empty()) ++ops["none"];
      for (auto l : labels) ++ops[std::string(to_string(l))];
    } catch (const Error&) {
      ++ops["unparsed"];
    }
  }
  const double n = ds.tables.empty() ? 1.0 : static_cast<double>(ds.tables.size());
  return {{"tables", ds.tables.size()},
          {"admitted_tables", admitted},
          {"rejections", reasons},
          {"mean_left_depth", left_depth / n},
          {"mean_top_depth", top_depth / n},
          {"samples", ds.samples.size()},
          {"samples_with_formula", with_formula},
          {"formula_operators", ops}};
}

// Labeled formula sub-expressions with numeric values, in preorder.
std::pair<std::vector<std::string>, std::vector<double>> formula_operators(const Sample& s, const HierTable& t) {
  std::vector<std::string> labels;
  std::vector<double> results;
  if (!s.formula) return {labels, results};
  const auto ast = parse_formula(*s.formula);
  for (const auto& ln : label_nodes(ast)) {
    const auto v = eval_formula(*ln.node, t);
    if (!v.is_number()) continue;
    labels.emplace_back(to_string(ln.label));
    results.push_back(v.as_number());
  }
  return {labels, results};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symbolic engine for question answering over hierarchical tables"};
  app.set_config("--config", "", "key=value configuration file");
  int jobs = 1;
  app.add_option("--jobs", jobs, "worker threads for per-sample commands")->check(CLI::PositiveNumber);
  app.require_subcommand(1);

  std::string table_file, tables_dir, samples_file, program, question, mode = "weak";
  std::string predictions_file, gold_file, gold_programs_file;
  SearchConfig search_cfg;
  bool with_stats = false;

  auto* ingest = app.add_subcommand("ingest", "validate tables and apply admission filters");
  ingest->add_option("--table", table_file, "table JSON file");
  ingest->add_option("--tables", tables_dir, "directory of table JSON files");

  auto* extract = app.add_subcommand("extract", "emit header trees as JSON");
  extract->add_option("--table", table_file, "table JSON file")->required();

  auto* exec = app.add_subcommand("exec", "execute a logical form on a table");
  exec->add_option("--table", table_file, "table JSON file")->required();
  exec->add_option("--program", program, "program text")->required();
  exec->add_option("--question", question, "question used to rank duplicate-header bindings");

  auto* search = app.add_subcommand("search", "random program search per sample");
  search->add_option("--tables", tables_dir)->required();
  search->add_option("--samples", samples_file)->required();
  search->add_option("--mode", mode)->check(CLI::IsMember({"weak", "partial"}));
  search->add_option("--budget", search_cfg.max_samples_per_item)->check(CLI::PositiveNumber);
  search->add_option("--seed", search_cfg.seed);
  search->add_option("--max-funcs", search_cfg.max_funcs)->check(CLI::Range(1, 6));
  search->add_flag("--stats", with_stats, "append a summary line");

  auto* eval = app.add_subcommand("eval", "execution accuracy and spurious rate");
  eval->add_option("--tables", tables_dir)->required();
  eval->add_option("--gold", gold_file, "samples JSONL with gold answers")->required();
  eval->add_option("--predictions", predictions_file)->required();
  eval->add_option("--gold-programs", gold_programs_file);

  auto* linearize = app.add_subcommand("linearize", "header linearization for QA encoders");
  linearize->add_option("--table", table_file)->required();

  auto* nlg = app.add_subcommand("nlg-serialize", "highlighted sub-table serialization per sample");
  nlg->add_option("--tables", tables_dir)->required();
  nlg->add_option("--samples", samples_file)->required();

  auto* flatten = app.add_subcommand("flatten", "unmerged flat grid");
  flatten->add_option("--table", table_file)->required();

  auto* stats = app.add_subcommand("stats", "dataset statistics");
  stats->add_option("--tables", tables_dir)->required();
  stats->add_option("--samples", samples_file);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*ingest) {
      if (table_file.empty() == tables_dir.empty()) {
        std::cerr << "ingest: give exactly one of --table or --tables\n";
        return 1;
      }
      std::vector<std::string> files;
      if (!table_file.empty()) {
        files.push_back(table_file);
      } else {
        for (const auto& e : fs::directory_iterator(tables_dir)) {
          if (e.path().extension() == ".json") files.push_back(e.path().string());
        }
        std::sort(files.begin(), files.end());
      }
      for (const auto& f : files) {
        const auto d = admit_document(read_file(f));
        Json j = {{"file", fs::path(f).filename().string()}, {"admitted", d.admitted()}};
        if (!d.admitted()) j["reason"] = to_string(*d.reject), j["detail"] = d.detail;
        std::cout << j.dump() << "\n";
      }
    } else if (*extract) {
      const auto t = load_table(read_file(table_file));
      std::cout << Json{{"table_id", t.table_id()},
                        {"left_tree", detail::tree_to_json(t.left_tree().to_spec())},
                        {"top_tree", detail::tree_to_json(t.top_tree().to_spec())}}
                       .dump()
                << "\n";
    } else if (*exec) {
      const auto t = load_table(read_file(table_file));
      std::cout << exec_value_json(execute(parse_program(program), t, question), t).dump() << "\n";
    } else if (*search) {
      search_cfg.mode = mode == "partial" ? SearchMode::Partial : SearchMode::Weak;
      const auto ds = load_dataset(tables_dir, samples_file);
      const auto outcomes = parallel_map<SearchOutcome>(ds.samples.size(), jobs, [&](std::size_t i) {
        return random_search(ds.samples[i], ds.table_for(ds.samples[i]), search_cfg);
      });
      for (std::size_t i = 0; i < outcomes.size(); ++i) {
        std::cout << search_result_json(ds.samples[i].sample_id, outcomes[i]).dump() << "\n";
      }
      if (with_stats) std::cout << Json{{"summary", search_stats_json(search_stats(outcomes))}}.dump() << "\n";
    } else if (*eval) {
      const auto ds = load_dataset(tables_dir, gold_file);
      const auto preds = load_predictions(read_file(predictions_file));
      Json j = {{"samples", ds.samples.size()}, {"predictions", preds.size()},
                {"execution_accuracy", execution_accuracy(preds, ds)}};
      if (!gold_programs_file.empty()) {
        j["spurious_rate"] = spurious_rate(preds, ds, load_gold_programs(read_file(gold_programs_file)));
      }
      std::cout << j.dump() << "\n";
    } else if (*linearize) {
      std::cout << linearize_table(load_table(read_file(table_file))) << "\n";
    } else if (*nlg) {
      const auto ds = load_dataset(tables_dir, samples_file);
      const auto lines = parallel_map<std::string>(ds.samples.size(), jobs, [&](std::size_t i) {
        const auto& s = ds.samples[i];
        const auto& t = ds.table_for(s);
        const auto [ops, results] = formula_operators(s, t);
        return serialize_for_nlg(t, s.highlighted_cells.value_or(std::vector<CellCoord>{}), ops, results);
      });
      for (const auto& l : lines) std::cout << l << "\n";
    } else if (*flatten) {
      std::cout << Json(flatten_for_export(load_table(read_file(table_file)))).dump() << "\n";
    } else if (*stats) {
      Dataset ds;
      if (samples_file.empty()) {
        ds.tables = load_tables(tables_dir);
      } else {
        ds = load_dataset(tables_dir, samples_file);
      }
      std::cout << stats_json(ds).dump() << "\n";
    }
  } catch (const Error& e) {
    std::cerr << to_string(e.code()) << ": " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
