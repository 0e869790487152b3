#include "fixtures.hpp"

#include "toolqa/evalkit.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace toolqa::testing {

namespace fs = std::filesystem;
using nlohmann::json;

const std::string kCrowdTableJson =
    R"({"header": ["Home team", "Home team score", "Away team", "Away team score", "Venue", "Crowd", "Date"], )"
    R"J("rows": [["North Melbourne", "12.10 (82)", "South Melbourne", "11.14 (80)", "Arden Street Oval", "6,000", "4 August 1928"], )J"
    R"J(["Fitzroy", "13.12 (90)", "Footscray", "12.17 (89)", "Brunswick Street Oval", "12,000", "4 August 1928"], )J"
    R"J(["Richmond", "11.13 (79)", "Melbourne", "7.8 (50)", "Punt Road Oval", "26,000", "4 August 1928"], )J"
    R"J(["Geelong", "4.14 (38)", "Essendon", "12.10 (82)", "Corio Oval", "10,000", "4 August 1928"], )J"
    R"J(["Hawthorn", "9.9 (63)", "Collingwood", "17.18 (120)", "Glenferrie Oval", "5,000", "4 August 1928"], )J"
    R"J(["St Kilda", "13.15 (93)", "Carlton", "10.9 (69)", "Junction Oval", "31,000", "4 August 1928"]], )J"
    R"("types": ["text", "text", "text", "text", "text", "real", "text"], "caption": "Round 15"})";

const std::string kCrowdQuery = "SELECT SUM([Crowd]) FROM data_table WHERE LOWER([Venue]) = LOWER('glenferrie oval')";

const std::string kHedgeGainsTableJson =
    R"J({"header": ["(In millions)", "", "", ""], "rows": [["Year Ended June 30,", "2019", "2018", "2017"], )J"
    R"J(["Effective Portion", "", "", ""], )J"
    R"J(["Gains recognized in other comprehensive income (loss), net of tax of $1, $11, and $4", "$  159", "$  219", "$  328"], )J"
    R"J(["Gains reclassified from accumulated other comprehensive income (loss) into revenue", "341", "185", "555"], )J"
    R"J(["Amount Excluded from Effectiveness Assessment and Ineffective Portion", "", "", ""], )J"
    R"J(["Losses recognized in other income (expense), net", "(64)", "(255)", "(389)"]]})J";

const std::string kDensityTableJson =
    R"J({"header": ["Administrative division", "Area (km) 2011**", "Population 2001 Census (Adjusted)", )J"
    R"J("Population 2011 Census (Adjusted)", "Population density (/km 2011)"], "rows": [)J"
    R"J(["Dhaka District", "1,463.6", 9036647, 12517361, "8,552.4"], )J"
    R"J(["=> Savar Upazila", "282.11", 629695, 1442885, "5,114.6"], )J"
    R"J(["=> Keraniganj Upazila", "166.82", 649373, 824538, "4,942.68"], )J"
    R"J(["Narayanganj District", "684.37", 2300514, 3074078, "4,491.8"], )J"
    R"J(["=> Narayanganj Sadar Upazila", "100.74", 946205, 1381796, "13,716.5"], )J"
    R"J(["=> Bandar Upazila", "54.39", 267021, 327149, "6,014.8"], )J"
    R"J(["=> Rupganj Upazila", "176.48", 423135, 558192, "3,162.9"], )J"
    R"J(["Gazipur District", "1,806.36", 2143200, 3548115, "1,964.2"], )J"
    R"J(["=> Gazipur Sadar Upazila", "457.67", 925454, 1899575, "4,150.5"], )J"
    R"J(["=> Kaliakair Upazila", "314.13", 278967, 503976, "1,604.3"], )J"
    R"J(["Narsingdi District", "1,150.14", 1983499, 2314899, "2,012.7"], )J"
    R"J(["=> Narsingdi Sadar Upazila", "213.43", 606474, 737362, "3,454.8"], )J"
    R"J(["=> Palash Upazila", "94.43", 198106, 221979, "2,350.7"]], )J"
    R"J("types": ["text", "text", "real", "real", "text"]})J";

Record hedge_gains_record() {
  Record r;
  r.id = "hedge-gains";
  r.dataset = DatasetTag::TatQa;
  r.instruction =
      "What was the % change in gains recognized in other comprehensive income (loss), net of tax of $1, $11, and $4 "
      "from 2018 to 2019?";
  r.input =
      "Cash Flow Hedge Gains (Losses) We recognized the following gains (losses) on foreign exchange contracts "
      "designated as cash flow hedges: We do not have any net derivative gains included in AOCI as of June 30, 2019 "
      "that will be reclassified into earnings within the following 12 months. No significant amounts of gains "
      "(losses) were reclassified from AOCI into earnings as a result of forecasted transactions that failed to "
      "occur during fiscal year 2019.";
  r.data = parse_table(kHedgeGainsTableJson);
  r.derivation = "(159-219)/219";
  return r;
}

Record density_record() {
  Record r;
  r.id = "density";
  r.dataset = DatasetTag::WikiSql;
  r.instruction = "In what division was there a population density in km2 of 4,491.8 in 2011?";
  r.data = parse_table(kDensityTableJson);
  r.derivation =
      "SELECT [Administrative division] FROM data_table WHERE [Population density (/km 2011)] = '4,491.8'";
  return r;
}

TempDir::TempDir() {
  static std::mt19937_64 rng{std::random_device{}()};
  for (int attempt = 0; attempt < 100; ++attempt) {
    fs::path p = fs::temp_directory_path() / ("toolqa-test-" + std::to_string(rng()));
    if (fs::create_directory(p)) {
      path_ = p;
      return;
    }
  }
  throw std::runtime_error("cannot create a temp directory");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

long pick(std::mt19937_64& rng, long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); }

bool coin(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

std::string grouped(long v) {
  std::string digits = std::to_string(v < 0 ? -v : v);
  std::string out;
  const std::size_t lead = digits.size() % 3 == 0 ? 3 : digits.size() % 3;
  out = digits.substr(0, lead);
  for (std::size_t i = lead; i < digits.size(); i += 3) out += "," + digits.substr(i, 3);
  return (v < 0 ? "-" : "") + out;
}

// num/den to two decimals, halves away from zero
std::string round2(long num, long den) {
  const bool negative = (num < 0) != (den < 0) && num != 0;
  const long n = std::labs(num) * 100;
  const long d = std::labs(den);
  const long hundredths = (2 * n + d) / (2 * d);
  std::string frac = std::to_string(hundredths % 100);
  if (frac.size() < 2) frac = "0" + frac;
  return std::string(negative && hundredths != 0 ? "-" : "") + std::to_string(hundredths / 100) + "." + frac;
}

std::string dump_lines(const std::vector<json>& lines) {
  std::string out;
  for (const auto& j : lines) out += j.dump() + "\n";
  return out;
}

std::string random_case(std::mt19937_64& rng, std::string s) {
  const long mode = pick(rng, 0, 2);
  for (char& c : s) {
    if (mode == 0) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (mode == 1) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return s;
}

fs::path write_tatqa(const fs::path& dir, std::size_t questions, std::mt19937_64& rng) {
  json doc = json::array();
  std::size_t made = 0;
  for (std::size_t item = 0; made < questions; ++item) {
    const std::string tag = std::to_string(item);
    const long a1 = pick(rng, 100, 99999), b1 = pick(rng, 100, 99999);
    const long a2 = pick(rng, 100, 9999), b2 = pick(rng, 100, 9999);
    const long a3 = pick(rng, 1, 999), b3 = pick(rng, 1, 999);
    json grid = json::array({json::array({"", "2019", "2018"}),
                             json::array({"Revenue " + tag, "$" + grouped(a1), "$" + grouped(b1)}),
                             json::array({"Cost of sales " + tag, grouped(a2), grouped(b2)}),
                             json::array({"Other expense " + tag, "(" + std::to_string(a3) + ")", std::to_string(b3)})});
    json paragraphs = json::array({json{{"uid", "p2-" + tag}, {"order", 2}, {"text", "Amounts are in thousands."}},
                                   json{{"uid", "p1-" + tag}, {"order", 1}, {"text", "Segment " + tag + " results are below."}}});
    json qs = json::array();
    auto add = [&](json q) {
      if (made >= questions) return;
      q["uid"] = "tatqa-" + tag + "-" + std::to_string(qs.size());
      qs.push_back(std::move(q));
      ++made;
    };
    const bool group_args = coin(rng, 0.5);
    const std::string da1 = group_args ? grouped(a1) : std::to_string(a1);
    const std::string db1 = group_args ? grouped(b1) : std::to_string(b1);
    add({{"question", "What was the change in Revenue " + tag + " between 2018 and 2019?"},
         {"answer_type", "arithmetic"},
         {"derivation", da1 + " - " + db1},
         {"answer", a1 - b1},
         {"scale", "thousand"}});
    add({{"question", "What was the percentage change in Cost of sales " + tag + " from 2018 to 2019?"},
         {"answer_type", "arithmetic"},
         {"derivation", "(" + std::to_string(a2) + "-" + std::to_string(b2) + ")/" + std::to_string(b2)},
         {"answer", json::parse(round2(100 * (a2 - b2), b2))},
         {"scale", "percent"}});
    if (coin(rng, 0.5)) {
      add({{"question", "What was the average Revenue " + tag + " for 2018 and 2019?"},
           {"answer_type", "arithmetic"},
           {"derivation", "(" + da1 + " + " + db1 + ") / 2"},
           {"answer", json::parse(round2(a1 + b1, 2))},
           {"scale", ""}});
    }
    if (coin(rng, 0.5)) {
      add({{"question", "What was the Other expense " + tag + " in 2019 and 2018 respectively?"},
           {"answer_type", "multi-span"},
           {"derivation", ""},
           {"answer", json::array({"(" + std::to_string(a3) + ")", std::to_string(b3)})},
           {"scale", ""}});
    } else {
      add({{"question", "What was the Revenue " + tag + " in 2019?"},
           {"answer_type", "span"},
           {"derivation", ""},
           {"answer", json::array({"$" + grouped(a1)})},
           {"scale", "thousand"}});
    }
    if (item % 5 == 0) {
      // percent tokens are outside the calculator grammar; answered directly
      add({{"question", "What is the sum of the growth rates for segment " + tag + "?"},
           {"answer_type", "arithmetic"},
           {"derivation", "1.5% + 2.5%"},
           {"answer", 4},
           {"scale", "percent"}});
    }
    doc.push_back(json{{"table", json{{"uid", "t-" + tag}, {"table", grid}}},
                       {"paragraphs", paragraphs},
                       {"questions", qs}});
  }
  const fs::path path = dir / "tatqa" / "tatqa_dataset_test.json";
  write_text(path, doc.dump(2));
  return path;
}

fs::path write_fpb(const fs::path& dir, std::size_t lines, std::mt19937_64& rng) {
  static constexpr std::array<std::string_view, 3> kLabels{"positive", "negative", "neutral"};
  static constexpr std::array<std::string_view, 3> kPhrases{"raised its outlook", "cut jobs", "kept guidance unchanged"};
  std::string text;
  for (std::size_t i = 0; i < lines; ++i) {
    const std::size_t k = static_cast<std::size_t>(pick(rng, 0, 2));
    text += "Company " + std::to_string(i) + " " + std::string(kPhrases[k]) + " after EUR " +
            std::to_string(pick(rng, 1, 900)) + "mn in sales in quarter " + std::to_string(i % 4 + 1) + " .@" +
            std::string(kLabels[k]) + "\n";
  }
  const fs::path path = dir / "fpb" / "Sentences_AllAgree.txt";
  write_text(path, text);
  return path;
}

fs::path write_ottqa(const fs::path& dir, std::size_t questions, std::mt19937_64& rng) {
  json tables = json::object();
  json passages = json::object();
  const std::size_t ntables = 8;
  const std::size_t nrows = 6;
  for (std::size_t k = 0; k < ntables; ++k) {
    const std::string id = "List_of_airports_" + std::to_string(k) + "_0";
    json header = k % 2 == 0 ? json::array({json::array({"Community", json::array()}),
                                            json::array({"Airport name", json::array()}),
                                            json::array({"IATA", json::array()})})
                             : json::array({"Community", "Airport name", "IATA"});
    json data = json::array();
    for (std::size_t r = 0; r < nrows; ++r) {
      const std::string town = "Town" + std::to_string(k) + "x" + std::to_string(r);
      const std::string link = "/wiki/" + town;
      data.push_back(json::array({json::array({town, json::array({link})}),
                                  json::array({town + " Airport", json::array()}),
                                  json::array({"T" + std::to_string(k * 10 + r), json::array()})}));
      passages[link] = town + " is a town about " + std::to_string(pick(rng, 2, 90)) + " km from the coast.";
    }
    tables[id] = json{{"uid", id}, {"title", "List of airports " + std::to_string(k)}, {"header", header}, {"data", data}};
  }
  json qs = json::array();
  for (std::size_t i = 0; i < questions; ++i) {
    const std::size_t k = i % ntables;
    const std::size_t r = static_cast<std::size_t>(pick(rng, 0, static_cast<long>(nrows) - 1));
    const std::string town = "Town" + std::to_string(k) + "x" + std::to_string(r);
    json q{{"question_id", "ottqa-" + std::to_string(i)},
           {"question", "Question " + std::to_string(i) + ": which airport serves " + town + "?"},
           {"table_id", "List_of_airports_" + std::to_string(k) + "_0"},
           {"answer-text", town + " Airport"}};
    json nodes = json::array({json::array({town + " Airport", json::array({r, 1}), nullptr, "table"})});
    if (i % 3 == 0) nodes.push_back(json::array({town, json::array({r, 0}), "/wiki/" + town, "passage"}));
    q["answer-node"] = nodes;
    qs.push_back(std::move(q));
  }
  const fs::path base = dir / "ottqa";
  write_text(base / "traindev_tables.json", tables.dump());
  write_text(base / "traindev_request_tok.json", passages.dump());
  write_text(base / "dev.json", qs.dump(1));
  return base / "dev.json";
}

}  // namespace

fs::path write_wikisql(const fs::path& dir, const std::string& stem, std::size_t questions, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  static constexpr std::array<std::string_view, 8> kVenues{"Glenferrie Oval", "Punt Road Oval", "Corio Oval",
                                                           "Junction Oval",   "Arden Street Oval", "Lake Oval",
                                                           "Princes Park",    "Western Oval"};
  const std::vector<std::string> header{"Home team", "Venue", "Crowd", "Score", "Date"};
  const std::vector<bool> numeric{false, false, true, true, false};
  const std::size_t ntables = std::max<std::size_t>(4, questions / 12);

  std::vector<json> table_lines;
  std::vector<std::vector<std::vector<std::string>>> cells(ntables);
  std::vector<std::vector<std::vector<long>>> nums(ntables);
  for (std::size_t k = 0; k < ntables; ++k) {
    const std::size_t nrows = static_cast<std::size_t>(pick(rng, 3, 8));
    json rows = json::array();
    for (std::size_t r = 0; r < nrows; ++r) {
      const long crowd = pick(rng, 1, 60) * 1000;
      const long score = pick(rng, 30, 140);
      std::vector<std::string> row{"Team " + std::to_string(k) + "-" + std::to_string(r),
                                   std::string(kVenues[static_cast<std::size_t>(pick(rng, 0, kVenues.size() - 1))]),
                                   grouped(crowd), std::to_string(score),
                                   std::to_string(pick(rng, 1, 28)) + " August 19" + std::to_string(pick(rng, 10, 39))};
      cells[k].push_back(row);
      nums[k].push_back({0, 0, crowd, score, 0});
      rows.push_back(row);
    }
    json t{{"id", "1-" + std::to_string(1000 + k) + "-1"},
           {"header", header},
           {"types", json::array({"text", "text", "real", "real", "text"})},
           {"rows", rows}};
    if (coin(rng, 0.5)) t["caption"] = "Round " + std::to_string(k + 1);
    table_lines.push_back(std::move(t));
  }

  std::vector<json> question_lines;
  for (std::size_t i = 0; i < questions; ++i) {
    const std::size_t k = i % ntables;
    const auto& rows = cells[k];
    const std::size_t target = static_cast<std::size_t>(pick(rng, 0, static_cast<long>(rows.size()) - 1));
    const std::size_t sel = static_cast<std::size_t>(pick(rng, 0, 4));
    int agg = 0;
    if (numeric[sel]) {
      agg = static_cast<int>(pick(rng, 0, 5));
    } else {
      static constexpr std::array<int, 4> kTextAggs{0, 0, 3, 1};
      agg = kTextAggs[static_cast<std::size_t>(pick(rng, 0, 3))];
    }
    json conds = json::array();
    std::vector<std::size_t> used;
    const long nconds = pick(rng, 0, 2);
    for (long c = 0; c < nconds; ++c) {
      const std::size_t col = static_cast<std::size_t>(pick(rng, 0, 4));
      if (std::find(used.begin(), used.end(), col) != used.end()) continue;
      used.push_back(col);
      if (!numeric[col]) {
        conds.push_back(json::array({col, 0, random_case(rng, rows[target][col])}));
        continue;
      }
      const long v = nums[k][target][col];
      const long op = pick(rng, 0, 2);
      if (op == 0) {
        conds.push_back(coin(rng, 0.5) ? json::array({col, 0, rows[target][col]}) : json::array({col, 0, v}));
      } else if (op == 1) {
        conds.push_back(json::array({col, 1, v - 1}));
      } else {
        conds.push_back(json::array({col, 2, v + 1}));
      }
    }
    question_lines.push_back(json{{"phase", 1},
                                  {"table_id", table_lines[k]["id"]},
                                  {"question", "Q" + std::to_string(i) + ": what is the " + header[sel] + " in round " +
                                                   std::to_string(k + 1) + "?"},
                                  {"sql", json{{"sel", sel}, {"conds", conds}, {"agg", agg}}}});
  }
  write_text(dir / (stem + ".tables.jsonl"), dump_lines(table_lines));
  write_text(dir / (stem + ".jsonl"), dump_lines(question_lines));
  return dir / (stem + ".jsonl");
}

FixtureFiles write_dataset_fixtures(const fs::path& dir, std::size_t per_dataset, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  FixtureFiles f;
  f.tatqa = write_tatqa(dir, per_dataset, rng);
  f.wikisql = write_wikisql(dir / "wikisql", "test", per_dataset, seed + 1);
  f.fpb = write_fpb(dir, per_dataset, rng);
  f.ottqa = write_ottqa(dir, per_dataset, rng);
  return f;
}

std::vector<Record> load_fixture_dataset(const FixtureFiles& files, DatasetTag tag) {
  switch (tag) {
    case DatasetTag::TatQa:
      return load_dataset(tag, files.tatqa);
    case DatasetTag::WikiSql:
      return load_dataset(tag, files.wikisql);
    case DatasetTag::Fpb:
      return load_dataset(tag, files.fpb);
    case DatasetTag::OttQa:
      return load_dataset(tag, files.ottqa);
  }
  return {};
}

ReplayFixture fixture_with_broken_tools(const std::vector<Record>& records, const std::vector<std::size_t>& broken) {
  ReplayFixture fixture = echo_gold_fixture(records);
  for (const auto& r : records) {
    if (auto gold = eval::gold_answer(r)) fixture.add(render_prompt(direct_template(r), r), *gold);
  }
  for (std::size_t i : broken) {
    const Record& r = records.at(i);
    const TemplateKind kind = gold_template(r);
    if (kind != TemplateKind::Arithmetic && kind != TemplateKind::Script) {
      throw std::invalid_argument("record " + r.id + " has no tool step");
    }
    fixture.add(render_prompt(kind, r), kind == TemplateKind::Arithmetic ? "1/0" : "SELEKT");
  }
  return fixture;
}

}  // namespace toolqa::testing
