#include "toolqa/cli.hpp"

#include "toolqa/calculator.hpp"
#include "toolqa/datasets.hpp"
#include "toolqa/error.hpp"
#include "toolqa/evalkit.hpp"
#include "toolqa/lm_backend.hpp"
#include "toolqa/pipeline.hpp"
#include "toolqa/sql_engine.hpp"
#include "toolqa/strings.hpp"

#include <CLI11.hpp>

#include <array>
#include <fstream>
#include <iostream>
#include <sstream>

namespace toolqa::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::optional<std::string> RunConfig::get(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) return std::nullopt;
  return it->second;
}

std::string RunConfig::get_or(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

RunConfig read_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::UnreadableFile, "cannot open " + path.string(), "config");
  RunConfig config;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view s = strings::trim(line);
    if (s.empty() || s.front() == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos || strings::trim(s.substr(0, eq)).empty()) {
      throw Error(ErrorKind::MalformedInput, path.string() + " line " + std::to_string(lineno) + ": expected key = value",
                  "config");
    }
    config.set(std::string(strings::trim(s.substr(0, eq))), std::string(strings::trim(s.substr(eq + 1))));
  }
  return config;
}

namespace {

constexpr std::array<DatasetTag, 4> kTags{DatasetTag::TatQa, DatasetTag::OttQa, DatasetTag::WikiSql, DatasetTag::Fpb};
constexpr std::array<std::string_view, 3> kSplitNames{"train", "dev", "test"};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(const Error& e) {
  if (e.kind() == ErrorKind::TransportError) return kTransport;
  return kData;
}

std::uint64_t parse_u64(const RunConfig& c, const std::string& key, std::uint64_t fallback) {
  auto v = c.get(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const unsigned long long out = std::stoull(*v, &used);
    if (used != v->size()) throw std::invalid_argument(key);
    return out;
  } catch (const std::exception&) {
    throw UsageError(key + " must be a non-negative integer, got '" + *v + "'");
  }
}

bool parse_bool(const RunConfig& c, const std::string& key, bool fallback) {
  auto v = c.get(key);
  if (!v) return fallback;
  const std::string s = strings::to_lower(*v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw UsageError(key + " must be a boolean, got '" + *v + "'");
}

fs::path out_dir(const RunConfig& c) { return c.get_or("out_dir", "out"); }

DatasetSource source_for(const RunConfig& c, DatasetTag tag, const std::string& path) {
  const std::string name(to_string(tag));
  DatasetSource src{tag, path, std::nullopt, std::nullopt};
  if (auto t = c.get(name + ".tables")) src.tables = *t;
  if (auto p = c.get(name + ".passages")) src.passages = *p;
  return src;
}

struct PreparedDataset {
  DatasetTag tag;
  Splits splits;
};

// Everything is loaded before anything is written.
std::vector<PreparedDataset> prepare_all(const RunConfig& c) {
  SplitSpec split_spec;
  split_spec.seed = parse_u64(c, "seed", split_spec.seed);
  BudgetSpec budget;
  budget.max_units = static_cast<std::size_t>(parse_u64(c, "max_units", budget.max_units));
  if (budget.max_units == 0) throw UsageError("max_units must be > 0");
  const std::string order = c.get_or("budget_order", "split-first");
  if (order != "split-first" && order != "filter-first") {
    throw UsageError("budget_order must be split-first or filter-first");
  }

  std::vector<PreparedDataset> out;
  for (auto tag : kTags) {
    const std::string name(to_string(tag));
    PreparedDataset prepared{tag, {}};
    bool present = false;
    if (auto path = c.get(name)) {
      present = true;
      std::vector<Record> records = load_dataset(source_for(c, tag, *path));
      if (tag == DatasetTag::WikiSql) {
        // the published test split is used as-is
        prepared.splits.test = std::move(records);
      } else if (order == "filter-first") {
        prepared.splits = split_80_10_10(filter_by_budget(records, budget), split_spec);
      } else {
        prepared.splits = split_80_10_10(records, split_spec);
      }
    }
    for (auto split : kSplitNames) {
      auto path = c.get(name + "." + std::string(split));
      if (!path) continue;
      present = true;
      std::vector<Record> records = load_dataset(source_for(c, tag, *path));
      auto& slot = split == "train" ? prepared.splits.train : split == "dev" ? prepared.splits.dev : prepared.splits.test;
      slot.insert(slot.end(), std::make_move_iterator(records.begin()), std::make_move_iterator(records.end()));
    }
    if (!present) continue;
    // only training observations are discarded for length
    if (order == "split-first") prepared.splits.train = filter_by_budget(prepared.splits.train, budget);
    out.push_back(std::move(prepared));
  }
  if (out.empty()) throw UsageError("no dataset paths configured (set tatqa, ottqa, wikisql or fpb)");
  return out;
}

int cmd_prepare(const RunConfig& c, bool emit_corpora) {
  const std::vector<PreparedDataset> datasets = prepare_all(c);
  const fs::path dir = out_dir(c);
  fs::create_directories(dir / "records");
  fs::create_directories(dir / "manifests");

  std::vector<Record> all_train;
  std::vector<Record> all_test;
  for (const auto& d : datasets) {
    const std::string name(to_string(d.tag));
    const std::array<const std::vector<Record>*, 3> parts{&d.splits.train, &d.splits.dev, &d.splits.test};
    std::ofstream manifest(dir / "manifests" / (name + ".tsv"), std::ios::binary);
    for (std::size_t i = 0; i < parts.size(); ++i) {
      write_records(dir / "records" / (name + "." + std::string(kSplitNames[i]) + ".jsonl"), *parts[i]);
      for (const auto& r : *parts[i]) manifest << r.id << '\t' << kSplitNames[i] << '\n';
    }
    if (!manifest) throw Error(ErrorKind::UnreadableFile, "cannot write manifest for " + name, "prepare");
    all_train.insert(all_train.end(), d.splits.train.begin(), d.splits.train.end());
    all_test.insert(all_test.end(), d.splits.test.begin(), d.splits.test.end());
    std::cerr << display_name(d.tag) << ": train " << d.splits.train.size() << ", dev " << d.splits.dev.size()
              << ", test " << d.splits.test.size() << '\n';
  }
  write_records(dir / "records" / "test.jsonl", all_test);

  if (emit_corpora) {
    fs::create_directories(dir / "corpora");
    save_fixture(dir / "corpora" / "solver.jsonl", build_solver_corpus(all_train));
    save_fixture(dir / "corpora" / "router.jsonl", build_router_corpus(all_train));
  }
  return kOk;
}

std::unique_ptr<Backend> make_backend(const RunConfig& c, const std::vector<Record>& records, int max_in_flight) {
  const std::string kind = c.get_or("backend", "echo-gold");
  if (kind == "echo-gold") return std::make_unique<EchoGoldBackend>(records);
  if (kind == "replay") {
    auto fixture = c.get("fixture");
    if (!fixture) throw UsageError("the replay backend needs --fixture");
    return std::make_unique<ReplayBackend>(load_fixture(*fixture));
  }
  if (kind == "remote") {
    RemoteConfig rc;
    rc.base_url = c.get_or("base_url", rc.base_url);
    rc.model_name = c.get_or("model", rc.model_name);
    rc.api_key_env = c.get_or("api_key_env", rc.api_key_env);
    rc.timeout_s = static_cast<int>(parse_u64(c, "timeout_s", static_cast<std::uint64_t>(rc.timeout_s)));
    rc.retries = static_cast<int>(parse_u64(c, "retries", static_cast<std::uint64_t>(rc.retries)));
    rc.max_in_flight = max_in_flight;
    return std::make_unique<RemoteBackend>(rc);
  }
  throw UsageError("unknown backend '" + kind + "' (expected remote, replay or echo-gold)");
}

int cmd_infer(const RunConfig& c) {
  const fs::path records_path = c.get_or("records", (out_dir(c) / "records" / "test.jsonl").string());
  const fs::path output = c.get_or("outcomes", (out_dir(c) / "outcomes.jsonl").string());
  const auto max_in_flight = parse_u64(c, "max_in_flight", 4);
  if (max_in_flight < 1) throw UsageError("max_in_flight must be >= 1");

  const std::vector<Record> records = read_records(records_path);
  BatchConfig batch;
  batch.max_in_flight = static_cast<int>(max_in_flight);
  batch.backoff = parse_bool(c, "backoff", true);
  const auto backend = make_backend(c, records, batch.max_in_flight);
  const std::vector<DispatchOutcome> outcomes = run_batch(records, *backend, batch);

  std::vector<json> lines;
  lines.reserve(outcomes.size());
  std::size_t errors = 0;
  std::size_t backoffs = 0;
  bool transport = false;
  for (const auto& o : outcomes) {
    lines.push_back(outcome_to_json(o));
    errors += o.error && !o.used_backoff ? 1 : 0;
    backoffs += o.used_backoff ? 1 : 0;
    transport = transport || (o.error && o.error->kind == ErrorKind::TransportError);
  }
  if (output.has_parent_path()) fs::create_directories(output.parent_path());
  write_jsonl(output, lines);
  std::cerr << outcomes.size() << " outcomes, " << errors << " unresolved errors, " << backoffs << " backoffs\n";
  return transport ? kTransport : kOk;
}

int cmd_evaluate(const RunConfig& c) {
  const fs::path records_path = c.get_or("records", (out_dir(c) / "records" / "test.jsonl").string());
  const fs::path outcomes_path = c.get_or("outcomes", (out_dir(c) / "outcomes.jsonl").string());
  const std::vector<Record> records = read_records(records_path);
  std::vector<DispatchOutcome> outcomes;
  for (const auto& j : read_jsonl(outcomes_path)) outcomes.push_back(outcome_from_json(j));

  const eval::EvalReport report = eval::score_run(outcomes, records);
  const std::string text = eval::render_report(report);
  const fs::path dir = out_dir(c);
  fs::create_directories(dir);
  std::ofstream(dir / "report.txt", std::ios::binary) << text;
  std::ofstream(dir / "report.json", std::ios::binary) << eval::report_to_json(report).dump(2) << '\n';
  std::cout << text;
  return kOk;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::UnreadableFile, "cannot open " + path.string(), "tools");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Tool-augmented table QA: data preparation, inference, tools and evaluation", "toolqa"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out, backend;
  bool no_backoff = false;
  std::optional<int> max_in_flight;

  auto add_shared = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key = value configuration file");
    cmd->add_option("--set", overrides, "Override a config key (key=value)");
    cmd->add_option("--seed", seed, "Split seed");
    cmd->add_option("--out-dir", out, "Output directory");
    cmd->add_option("--backend", backend, "remote, replay or echo-gold");
    cmd->add_flag("--no-backoff", no_backoff, "Disable the direct-answer fallback");
    cmd->add_option("--max-in-flight", max_in_flight, "Concurrent records during inference")
        ->check(CLI::PositiveNumber);
  };

  auto* prepare = app.add_subcommand("prepare", "Load datasets, split, filter and write record files");
  add_shared(prepare);
  bool emit_corpora = false;
  prepare->add_flag("--emit-corpora", emit_corpora, "Also write solver and router corpora from the train split");
  std::map<std::string, std::string> dataset_flags;
  for (auto tag : kTags) {
    const std::string name(to_string(tag));
    prepare->add_option("--" + name, dataset_flags[name], "Path to the " + std::string(display_name(tag)) + " file");
  }

  auto* infer = app.add_subcommand("infer", "Route and solve every record with a backend");
  add_shared(infer);
  std::string records_flag, outcomes_flag, fixture_flag;
  infer->add_option("--records", records_flag, "Record file (default <out-dir>/records/test.jsonl)");
  infer->add_option("--output", outcomes_flag, "Outcome file (default <out-dir>/outcomes.jsonl)");
  infer->add_option("--fixture", fixture_flag, "Replay fixture for --backend replay");

  auto* evaluate = app.add_subcommand("evaluate", "Score outcomes against records");
  add_shared(evaluate);
  evaluate->add_option("--records", records_flag, "Record file");
  evaluate->add_option("--outcomes", outcomes_flag, "Outcome file");

  auto* tools = app.add_subcommand("tools", "Run a tool directly");
  tools->require_subcommand(1);
  auto* calc_cmd = tools->add_subcommand("calc", "Evaluate an arithmetic expression");
  std::string expression;
  calc_cmd->add_option("expression", expression, "Expression")->required();
  auto* sql_cmd = tools->add_subcommand("sql", "Run a SQL script over a table file");
  std::string table_path, query;
  sql_cmd->add_option("--table", table_path, "Table JSON file")->required();
  sql_cmd->add_option("--query", query, "SQL script")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (tools->parsed()) {
      if (calc_cmd->parsed()) {
        std::cout << calc::run_calculator(expression) << '\n';
      } else {
        std::cout << sql::run_script(query, read_file(table_path)) << '\n';
      }
      return kOk;
    }

    RunConfig config;
    if (!config_path.empty()) config = read_config(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
      config.set(std::string(strings::trim(kv.substr(0, eq))), std::string(strings::trim(kv.substr(eq + 1))));
    }
    if (seed) config.set("seed", std::to_string(*seed));
    if (!out.empty()) config.set("out_dir", out);
    if (!backend.empty()) config.set("backend", backend);
    if (no_backoff) config.set("backoff", "false");
    if (max_in_flight) config.set("max_in_flight", std::to_string(*max_in_flight));
    for (const auto& [name, path] : dataset_flags) {
      if (!path.empty()) config.set(name, path);
    }
    if (!records_flag.empty()) config.set("records", records_flag);
    if (!outcomes_flag.empty()) config.set("outcomes", outcomes_flag);
    if (!fixture_flag.empty()) config.set("fixture", fixture_flag);

    if (prepare->parsed()) return cmd_prepare(config, emit_corpora);
    if (infer->parsed()) return cmd_infer(config);
    return cmd_evaluate(config);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
}

}  // namespace toolqa::cli
