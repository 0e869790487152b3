#include "toolqa/datasets.hpp"

#include "toolqa/calculator.hpp"
#include "toolqa/error.hpp"
#include "toolqa/sql_engine.hpp"
#include "toolqa/strings.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

namespace toolqa {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::UnreadableFile, "cannot open " + path.string(), "load");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::UnreadableFile, "read failed for " + path.string(), "load");
  return ss.str();
}

[[noreturn]] void schema_error(const fs::path& path, const std::string& what) {
  throw Error(ErrorKind::SchemaMismatch, path.string() + ": " + what, "load");
}

json parse_json_file(const fs::path& path) {
  const std::string text = read_file(path);
  if (strings::trim(text).empty()) schema_error(path, "file is empty");
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    schema_error(path, e.what());
  }
}

std::vector<json> parse_jsonl_file(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<json> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (strings::trim(line).empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      schema_error(path, "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (out.empty()) schema_error(path, "file is empty");
  return out;
}

// Scalar JSON value as answer text.
std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return v.dump();
  if (v.is_null()) return {};
  return v.dump();
}

std::string cell_of(const json& v) {
  // OTT-QA cells come as [text, links]
  if (v.is_array() && !v.empty()) return scalar_text(v[0]);
  return scalar_text(v);
}

// ---------------------------------------------------------------- TAT-QA

std::string tatqa_answer(const json& answer, const std::string& scale) {
  std::string text;
  if (answer.is_array()) {
    std::vector<std::string> parts;
    for (const auto& a : answer) parts.push_back(scalar_text(a));
    text = strings::join(parts, ", ");
  } else {
    text = scalar_text(answer);
  }
  if (scale == "percent" && !text.empty() && text.back() != '%') text += '%';
  return text;
}

std::vector<Record> load_tatqa(const fs::path& path) {
  const json doc = parse_json_file(path);
  if (!doc.is_array()) schema_error(path, "expected a top-level array");
  std::vector<Record> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& item = doc[i];
    if (!item.is_object() || !item.contains("questions")) {
      schema_error(path, "item " + std::to_string(i) + " lacks \"questions\"");
    }
    std::optional<Table> table;
    if (item.contains("table") && item["table"].contains("table")) {
      const json& grid = item["table"]["table"];
      if (!grid.is_array() || grid.empty()) schema_error(path, "item " + std::to_string(i) + ": empty table");
      std::vector<std::string> header;
      for (const auto& c : grid[0]) header.push_back(scalar_text(c));
      std::vector<Table::Row> rows;
      for (std::size_t r = 1; r < grid.size(); ++r) {
        Table::Row row;
        for (const auto& c : grid[r]) row.push_back(scalar_text(c));
        row.resize(header.size());
        rows.push_back(std::move(row));
      }
      table.emplace(std::move(header), std::move(rows));
    }
    std::optional<std::string> input;
    if (item.contains("paragraphs") && item["paragraphs"].is_array()) {
      std::vector<std::pair<long, std::string>> paras;
      for (const auto& p : item["paragraphs"]) {
        paras.emplace_back(p.value("order", 0L), p.value("text", std::string{}));
      }
      std::stable_sort(paras.begin(), paras.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      std::vector<std::string> texts;
      for (auto& [_, t] : paras) {
        if (!strings::trim(t).empty()) texts.push_back(std::string(strings::trim(t)));
      }
      if (!texts.empty()) input = strings::join(texts, " ");
    }
    for (const auto& q : item["questions"]) {
      if (!q.contains("question")) schema_error(path, "question without \"question\" text");
      Record r;
      r.dataset = DatasetTag::TatQa;
      r.id = q.value("uid", "tatqa-" + std::to_string(out.size()));
      r.instruction = q["question"].get<std::string>();
      r.input = input;
      r.data = table;
      const std::string scale = q.contains("scale") && q["scale"].is_string() ? q["scale"].get<std::string>() : "";
      if (q.contains("answer")) {
        std::string answer = tatqa_answer(q["answer"], scale);
        if (!answer.empty()) r.response = std::move(answer);
      }
      if (q.value("answer_type", std::string{}) == "arithmetic" && q.contains("derivation") &&
          q["derivation"].is_string()) {
        std::string derivation(strings::trim(q["derivation"].get<std::string>()));
        try {
          calc::parse_expression(derivation);
          r.derivation = std::move(derivation);
        } catch (const Error&) {
          // not a closed-grammar equation; the item is answered directly
        }
      }
      if (!r.response && !r.derivation) schema_error(path, "question " + r.id + " has neither answer nor derivation");
      out.push_back(std::move(r));
    }
  }
  if (out.empty()) schema_error(path, "no questions");
  return out;
}

// --------------------------------------------------------------- Wiki-SQL

constexpr std::array<std::string_view, 6> kWikiAggregates{"", "MAX", "MIN", "COUNT", "SUM", "AVG"};
constexpr std::array<std::string_view, 3> kWikiOps{"=", ">", "<"};

std::string quote_sql_string(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    out += c;
    if (c == '\'') out += '\'';
  }
  return out + "'";
}

std::string bracket(const std::string& name) {
  std::string out = "[";
  for (char c : name) {
    out += c;
    if (c == ']') out += ']';
  }
  return out + "]";
}

std::string wikisql_script(const json& sql, const Table& table, const fs::path& path) {
  const auto& header = table.header();
  const int sel = sql.at("sel").get<int>();
  const int agg = sql.value("agg", 0);
  if (sel < 0 || static_cast<std::size_t>(sel) >= header.size()) schema_error(path, "\"sel\" out of range");
  if (agg < 0 || agg >= static_cast<int>(kWikiAggregates.size())) schema_error(path, "\"agg\" out of range");
  std::string out = "SELECT ";
  if (agg == 0) {
    out += bracket(header[sel]);
  } else {
    out += std::string(kWikiAggregates[agg]) + "(" + bracket(header[sel]) + ")";
  }
  out += " FROM data_table";
  bool first = true;
  for (const auto& cond : sql.value("conds", json::array())) {
    if (!cond.is_array() || cond.size() != 3) schema_error(path, "malformed condition");
    const int col = cond[0].get<int>();
    const int op = cond[1].get<int>();
    if (col < 0 || static_cast<std::size_t>(col) >= header.size()) schema_error(path, "condition column out of range");
    if (op < 0 || op >= static_cast<int>(kWikiOps.size())) schema_error(path, "unsupported condition operator");
    out += first ? " WHERE " : " AND ";
    first = false;
    const std::string value = scalar_text(cond[2]);
    const bool numeric = table.col_types()[col] == ColumnType::Real && coerce_numeric(value).has_value();
    if (numeric) {
      out += bracket(header[col]) + " " + std::string(kWikiOps[op]) + " " + format_decimal(*coerce_numeric(value));
    } else if (op == 0) {
      out += "LOWER(" + bracket(header[col]) + ") = LOWER(" + quote_sql_string(value) + ")";
    } else {
      out += bracket(header[col]) + " " + std::string(kWikiOps[op]) + " " + quote_sql_string(value);
    }
  }
  return out;
}

fs::path wikisql_tables_path(const fs::path& questions) {
  fs::path p = questions;
  std::string name = p.filename().string();
  const std::string suffix = ".jsonl";
  if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
    name = name.substr(0, name.size() - suffix.size());
  }
  return p.parent_path() / (name + ".tables.jsonl");
}

std::vector<Record> load_wikisql(const fs::path& path, const fs::path& tables_path) {
  std::unordered_map<std::string, Table> tables;
  for (const auto& t : parse_jsonl_file(tables_path)) {
    if (!t.contains("id") || !t.contains("header") || !t.contains("rows")) {
      schema_error(tables_path, "table entry lacks id/header/rows");
    }
    std::vector<std::string> header;
    for (const auto& h : t["header"]) header.push_back(scalar_text(h));
    std::vector<Table::Row> rows;
    for (const auto& jr : t["rows"]) {
      Table::Row row;
      for (const auto& c : jr) row.push_back(scalar_text(c));
      rows.push_back(std::move(row));
    }
    std::optional<std::vector<ColumnType>> types;
    if (t.contains("types") && t["types"].is_array()) {
      types.emplace();
      for (const auto& ty : t["types"]) types->push_back(ty == "real" ? ColumnType::Real : ColumnType::Text);
    }
    std::optional<std::string> caption;
    if (t.contains("caption") && t["caption"].is_string() && !t["caption"].get<std::string>().empty()) {
      caption = t["caption"].get<std::string>();
    }
    try {
      tables.emplace(t["id"].get<std::string>(), Table(std::move(header), std::move(rows), std::move(types), std::move(caption)));
    } catch (const Error& e) {
      schema_error(tables_path, e.what());
    }
  }

  std::vector<Record> out;
  std::size_t lineno = 0;
  for (const auto& q : parse_jsonl_file(path)) {
    ++lineno;
    if (!q.contains("question") || !q.contains("table_id") || !q.contains("sql")) {
      schema_error(path, "entry " + std::to_string(lineno) + " lacks question/table_id/sql");
    }
    const std::string table_id = q["table_id"].get<std::string>();
    auto it = tables.find(table_id);
    if (it == tables.end()) schema_error(path, "unknown table_id " + table_id);
    Record r;
    r.dataset = DatasetTag::WikiSql;
    r.id = "wikisql-" + path.stem().string() + "-" + std::to_string(lineno);
    r.instruction = q["question"].get<std::string>();
    r.data = it->second;
    r.derivation = wikisql_script(q["sql"], it->second, path);
    try {
      r.response = sql::render_result(sql::execute_query(sql::parse_sql(*r.derivation), it->second));
    } catch (const Error&) {
      // unanswerable annotation; the derivation alone is kept
    }
    out.push_back(std::move(r));
  }
  return out;
}

// -------------------------------------------------------------------- FPB

std::vector<Record> load_fpb(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<Record> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (strings::trim(line).empty()) continue;
    if (!strings::is_valid_utf8(line)) line = strings::latin1_to_utf8(line);
    const std::size_t at = line.rfind('@');
    if (at == std::string::npos) schema_error(path, "line " + std::to_string(lineno) + ": missing '@label'");
    const std::string label = strings::to_lower(strings::trim(std::string_view(line).substr(at + 1)));
    if (label != "positive" && label != "negative" && label != "neutral") {
      schema_error(path, "line " + std::to_string(lineno) + ": unknown label '" + label + "'");
    }
    Record r;
    r.dataset = DatasetTag::Fpb;
    r.id = "fpb-" + std::to_string(lineno);
    r.instruction = std::string(kSentimentInstruction);
    r.input = std::string(strings::trim(std::string_view(line).substr(0, at)));
    r.response = label;
    out.push_back(std::move(r));
  }
  if (out.empty()) schema_error(path, "file is empty");
  return out;
}

// ----------------------------------------------------------------- OTT-QA

std::vector<Record> load_ottqa(const fs::path& path, const fs::path& tables_path,
                               const std::optional<fs::path>& passages_path) {
  const json questions = parse_json_file(path);
  if (!questions.is_array()) schema_error(path, "expected a top-level array");
  const json tables = parse_json_file(tables_path);
  if (!tables.is_object()) schema_error(tables_path, "expected an object keyed by table id");
  json passages = json::object();
  if (passages_path) passages = parse_json_file(*passages_path);

  std::unordered_map<std::string, Table> cache;
  std::vector<Record> out;
  for (const auto& q : questions) {
    if (!q.contains("question") || !q.contains("table_id") || !q.contains("answer-text")) {
      schema_error(path, "entry lacks question/table_id/answer-text");
    }
    const std::string table_id = q["table_id"].get<std::string>();
    auto it = cache.find(table_id);
    if (it == cache.end()) {
      if (!tables.contains(table_id)) schema_error(path, "unknown table_id " + table_id);
      const json& t = tables[table_id];
      std::vector<std::string> header;
      for (const auto& h : t.at("header")) header.push_back(cell_of(h));
      std::vector<Table::Row> rows;
      for (const auto& jr : t.at("data")) {
        Table::Row row;
        for (const auto& c : jr) row.push_back(cell_of(c));
        row.resize(header.size());
        rows.push_back(std::move(row));
      }
      std::optional<std::string> caption;
      if (t.contains("title") && t["title"].is_string() && !t["title"].get<std::string>().empty()) {
        caption = t["title"].get<std::string>();
      }
      it = cache.emplace(table_id, Table(std::move(header), std::move(rows), std::nullopt, std::move(caption))).first;
    }
    Record r;
    r.dataset = DatasetTag::OttQa;
    r.id = q.value("question_id", "ottqa-" + std::to_string(out.size()));
    r.instruction = q["question"].get<std::string>();
    r.data = it->second;
    r.response = scalar_text(q["answer-text"]);
    if (passages_path && q.contains("answer-node")) {
      std::vector<std::string> links, texts;
      for (const auto& node : q["answer-node"]) {
        if (!node.is_array() || node.size() < 4 || node[3] != "passage" || !node[2].is_string()) continue;
        const std::string link = node[2].get<std::string>();
        if (std::find(links.begin(), links.end(), link) != links.end()) continue;
        links.push_back(link);
        if (passages.contains(link)) texts.push_back(scalar_text(passages[link]));
      }
      if (!texts.empty()) r.input = strings::join(texts, " ");
    }
    if (r.response->empty()) schema_error(path, "question " + r.id + " has an empty answer");
    out.push_back(std::move(r));
  }
  if (out.empty()) schema_error(path, "no questions");
  return out;
}

// Unbiased draw in [0, bound).
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

std::size_t floor_share(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction + 1e-9));
}

}  // namespace

std::vector<Record> load_dataset(const DatasetSource& source) {
  if (!fs::exists(source.path)) {
    throw Error(ErrorKind::UnreadableFile, "no such file " + source.path.string(), "load");
  }
  switch (source.tag) {
    case DatasetTag::TatQa:
      return load_tatqa(source.path);
    case DatasetTag::Fpb:
      return load_fpb(source.path);
    case DatasetTag::WikiSql:
      return load_wikisql(source.path, source.tables.value_or(wikisql_tables_path(source.path)));
    case DatasetTag::OttQa: {
      const fs::path dir = source.path.parent_path();
      std::optional<fs::path> passages = source.passages;
      if (!passages && fs::exists(dir / "traindev_request_tok.json")) passages = dir / "traindev_request_tok.json";
      return load_ottqa(source.path, source.tables.value_or(dir / "traindev_tables.json"), passages);
    }
  }
  return {};
}

std::vector<Record> load_dataset(DatasetTag tag, const fs::path& path) {
  return load_dataset(DatasetSource{tag, path, std::nullopt, std::nullopt});
}

Splits split_80_10_10(const std::vector<Record>& records, const SplitSpec& spec) {
  if (records.empty()) throw Error(ErrorKind::EmptyInput, "cannot split an empty record list", "split");
  if (std::abs(spec.train + spec.dev + spec.test - 1.0) > 1e-9) {
    throw std::invalid_argument("split fractions must sum to 1");
  }
  const std::size_t n = records.size();
  const std::size_t dev_n = floor_share(n, spec.dev);
  const std::size_t test_n = floor_share(n, spec.test);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(spec.seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[draw_below(rng, i + 1)]);
  }
  std::vector<int> bucket(n, 0);  // 0 train, 1 dev, 2 test
  for (std::size_t k = 0; k < dev_n; ++k) bucket[order[k]] = 1;
  for (std::size_t k = dev_n; k < dev_n + test_n; ++k) bucket[order[k]] = 2;

  Splits out;
  for (std::size_t i = 0; i < n; ++i) {
    (bucket[i] == 0 ? out.train : bucket[i] == 1 ? out.dev : out.test).push_back(records[i]);
  }
  return out;
}

std::size_t prompt_units(const Record& record) {
  return strings::utf8_length(render_prompt(gold_template(record), record));
}

std::vector<Record> filter_by_budget(const std::vector<Record>& records, const BudgetSpec& budget) {
  std::vector<Record> out;
  for (const auto& r : records) {
    try {
      if (prompt_units(r) <= budget.max_units) out.push_back(r);
    } catch (const Error&) {
      // unlabelled records cannot be rendered for training
    }
  }
  return out;
}

json record_to_json(const Record& r) {
  json j;
  j["id"] = r.id;
  j["dataset"] = std::string(to_string(r.dataset));
  j["instruction"] = r.instruction;
  j["input"] = r.input ? json(*r.input) : json(nullptr);
  j["data"] = r.data ? json::parse(render_table(*r.data)) : json(nullptr);
  j["derivation"] = r.derivation ? json(*r.derivation) : json(nullptr);
  j["response"] = r.response ? json(*r.response) : json(nullptr);
  return j;
}

Record record_from_json(const json& j) {
  if (!j.is_object() || !j.contains("instruction") || !j["instruction"].is_string()) {
    throw Error(ErrorKind::SchemaMismatch, "record lacks \"instruction\"", "load");
  }
  Record r;
  r.id = j.value("id", std::string{});
  const std::string tag = j.value("dataset", std::string{"tatqa"});
  auto parsed = dataset_tag_from_string(tag);
  if (!parsed) throw Error(ErrorKind::SchemaMismatch, "unknown dataset tag '" + tag + "'", "load");
  r.dataset = *parsed;
  r.instruction = j["instruction"].get<std::string>();
  auto opt_string = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_string()) throw Error(ErrorKind::SchemaMismatch, std::string("\"") + key + "\" must be a string", "load");
    return j[key].get<std::string>();
  };
  r.input = opt_string("input");
  r.derivation = opt_string("derivation");
  r.response = opt_string("response");
  if (j.contains("data") && !j["data"].is_null()) {
    try {
      r.data = parse_table(j["data"].is_string() ? j["data"].get<std::string>() : j["data"].dump());
    } catch (const Error& e) {
      throw Error(ErrorKind::SchemaMismatch, e.what(), "load");
    }
  }
  if (!r.derivation && !r.response) {
    throw Error(ErrorKind::SchemaMismatch, "record " + r.id + " has neither derivation nor response", "load");
  }
  return r;
}

void write_jsonl(const fs::path& path, const std::vector<json>& lines) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::UnreadableFile, "cannot write " + path.string(), "write");
  for (const auto& line : lines) out << line.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  if (!out) throw Error(ErrorKind::UnreadableFile, "write failed for " + path.string(), "write");
}

std::vector<json> read_jsonl(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorKind::UnreadableFile, "no such file " + path.string(), "load");
  const std::string text = read_file(path);
  std::vector<json> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (strings::trim(line).empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      schema_error(path, "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_records(const fs::path& path, const std::vector<Record>& records) {
  std::vector<json> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(record_to_json(r));
  write_jsonl(path, lines);
}

std::vector<Record> read_records(const fs::path& path) {
  std::vector<Record> out;
  std::size_t lineno = 0;
  for (const auto& j : read_jsonl(path)) {
    ++lineno;
    try {
      out.push_back(record_from_json(j));
    } catch (const Error& e) {
      schema_error(path, "line " + std::to_string(lineno) + ": " + e.detail());
    }
  }
  return out;
}

}  // namespace toolqa
