#include "toolqa/evalkit.hpp"

#include "toolqa/calculator.hpp"
#include "toolqa/error.hpp"
#include "toolqa/sql_engine.hpp"
#include "toolqa/strings.hpp"
#include "toolqa/tabular.hpp"

#include <array>
#include <cstdio>

namespace toolqa::eval {

using nlohmann::json;

namespace {

constexpr std::string_view kTerminalPunct = ".!?;:";

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string strip_terminal(std::string_view s) {
  s = strings::trim(s);
  while (!s.empty() && kTerminalPunct.find(s.back()) != std::string_view::npos) {
    s = strings::trim(s.substr(0, s.size() - 1));
  }
  return std::string(s);
}

// A comma followed by exactly three digits after a digit groups thousands.
bool is_group_comma(std::string_view s, std::size_t i) {
  if (i == 0 || !is_digit(s[i - 1]) || i + 3 >= s.size()) return false;
  for (std::size_t k = 1; k <= 3; ++k) {
    if (!is_digit(s[i + k])) return false;
  }
  return i + 4 >= s.size() || !is_digit(s[i + 4]);
}

std::vector<std::string> split_parts(std::string_view s) {
  std::vector<std::string> parts;
  std::string current;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == ',' && !is_group_comma(s, i)) {
      parts.push_back(current);
      current.clear();
    } else {
      current += s[i];
    }
  }
  parts.push_back(current);
  return parts;
}

std::optional<NumericPart> parse_numeric(std::string_view part) {
  std::string_view s = strings::trim(part);
  NumericPart out;
  if (ends_with(s, "%")) {
    out.percent = true;
    s = strings::trim(s.substr(0, s.size() - 1));
  } else if (ends_with(s, "percent")) {
    out.percent = true;
    s = strings::trim(s.substr(0, s.size() - 7));
  }
  int scale = 0;
  static constexpr std::array<std::pair<std::string_view, int>, 3> kScales{
      {{"thousand", 3}, {"million", 6}, {"billion", 9}}};
  for (const auto& [word, exp] : kScales) {
    if (ends_with(s, word)) {
      s = strings::trim(s.substr(0, s.size() - word.size()));
      scale = exp;
      break;
    }
  }
  if (!s.empty() && s.front() == '+') s = strings::trim(s.substr(1));
  auto value = coerce_numeric(s);
  if (!value) return std::nullopt;
  int decimals = 0;
  if (auto point = s.find('.'); point != std::string_view::npos) {
    for (std::size_t i = point + 1; i < s.size() && is_digit(s[i]); ++i) ++decimals;
  }
  out.value = *value * pow10(scale);
  out.decimals = std::max(0, decimals - scale);
  return out;
}

Rational abs_value(const Rational& v) { return v < 0 ? Rational(-v) : v; }

bool numbers_match(NumericPart a, NumericPart b) {
  if (a.percent != b.percent) {
    // bridge 0-1 fractions to 0-100 percentages
    NumericPart& plain = a.percent ? b : a;
    plain.value *= 100;
    plain.decimals = std::max(0, plain.decimals - 2);
  }
  const Rational diff = abs_value(a.value - b.value);
  const Rational scale = std::max(abs_value(a.value), abs_value(b.value));
  if (diff <= scale * Rational(1, 1000000)) return true;
  if (a.decimals > b.decimals) return round_to_decimals(a.value, b.decimals) == b.value;
  if (b.decimals > a.decimals) return round_to_decimals(b.value, a.decimals) == a.value;
  return false;
}

bool parts_match(const AnswerPart& a, const AnswerPart& b) {
  if (a.index() != b.index()) return false;
  if (const auto* ta = std::get_if<std::string>(&a)) return *ta == std::get<std::string>(b);
  return numbers_match(std::get<NumericPart>(a), std::get<NumericPart>(b));
}

constexpr std::array<DatasetTag, 4> kReportOrder{DatasetTag::TatQa, DatasetTag::OttQa, DatasetTag::WikiSql,
                                                 DatasetTag::Fpb};

json tally_json(const Tally& t) {
  return json{{"accuracy", t.fraction()}, {"correct", t.correct}, {"total", t.total}};
}

}  // namespace

std::string CanonicalAnswer::text() const {
  std::vector<std::string> rendered;
  for (const auto& part : parts) {
    if (const auto* t = std::get_if<std::string>(&part)) {
      rendered.push_back(*t);
    } else {
      const auto& n = std::get<NumericPart>(part);
      rendered.push_back(format_exact_decimal(n.value).value_or(format_decimal(n.value)) + (n.percent ? "%" : ""));
    }
  }
  return strings::join(rendered, ", ");
}

CanonicalAnswer normalize_answer(std::string_view text) {
  CanonicalAnswer out;
  const std::string folded = strip_terminal(strings::to_lower(text));
  for (const auto& raw : split_parts(folded)) {
    const std::string part = strings::collapse_spaces(strip_terminal(raw));
    if (part.empty()) continue;
    if (auto number = parse_numeric(part)) {
      out.parts.emplace_back(std::move(*number));
    } else {
      out.parts.emplace_back(part);
    }
  }
  return out;
}

bool exact_match(std::string_view prediction, std::string_view gold) {
  const CanonicalAnswer a = normalize_answer(prediction);
  const CanonicalAnswer b = normalize_answer(gold);
  if (a.parts.size() != b.parts.size()) return false;
  for (std::size_t i = 0; i < a.parts.size(); ++i) {
    if (!parts_match(a.parts[i], b.parts[i])) return false;
  }
  return true;
}

std::optional<std::string> gold_answer(const Record& record) {
  if (record.response) return record.response;
  if (!record.derivation) return std::nullopt;
  try {
    switch (gold_template(record)) {
      case TemplateKind::Arithmetic:
        return calc::run_calculator(*record.derivation);
      case TemplateKind::Script:
        if (!record.data) return std::nullopt;
        return sql::run_script(*record.derivation, render_table(*record.data));
      default:
        return std::nullopt;
    }
  } catch (const Error&) {
    return std::nullopt;
  }
}

EvalReport score_run(const std::vector<DispatchOutcome>& outcomes, const std::vector<Record>& golds) {
  if (outcomes.size() != golds.size()) {
    throw Error(ErrorKind::LengthMismatch,
                std::to_string(outcomes.size()) + " outcomes vs " + std::to_string(golds.size()) + " records",
                "evaluate");
  }
  EvalReport report;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const DispatchOutcome& o = outcomes[i];
    const Record& r = golds[i];
    TemplateKind gold_kind;
    try {
      gold_kind = gold_template(r);
    } catch (const Error&) {
      gold_kind = direct_template(r);
    }
    const auto gold = gold_answer(r);
    const bool correct = o.final_answer && gold && exact_match(*o.final_answer, *gold);
    const bool routed = !(o.error && o.error->kind == ErrorKind::UnknownTemplate);

    report.per_dataset[r.dataset].add(correct);
    report.router[r.dataset].add(routed && o.route == gold_kind);
    report.per_template[gold_kind].add(correct);
    if (gold_kind == TemplateKind::Arithmetic && r.derivation) {
      report.complexity[calc::expression_complexity(*r.derivation)].add(correct);
    }
    report.backoff.add(o.used_backoff);
  }
  return report;
}

std::string format_percent(const Tally& tally) {
  if (tally.total == 0) return "0.00%";
  // basis points, rounded half up
  const unsigned long long bp = (static_cast<unsigned long long>(tally.correct) * 20000ULL + tally.total) /
                                (2ULL * tally.total);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%llu.%02llu%%", bp / 100, bp % 100);
  return buf;
}

std::string render_report(const EvalReport& report) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %8s %12s\n", "Dataset", "Items", "Exact Match");
  out += line;
  for (auto tag : kReportOrder) {
    auto it = report.per_dataset.find(tag);
    if (it == report.per_dataset.end()) continue;
    std::snprintf(line, sizeof line, "%-10s %8zu %12s\n", std::string(display_name(tag)).c_str(), it->second.total,
                  format_percent(it->second).c_str());
    out += line;
  }
  if (report.per_dataset.empty()) return out;

  out += '\n';
  for (auto tag : kReportOrder) {
    auto it = report.router.find(tag);
    if (it == report.router.end()) continue;
    out += "Router accuracy (" + std::string(display_name(tag)) + "): " + format_percent(it->second) + '\n';
  }
  out += "Backoff usage: " + format_percent(report.backoff) + '\n';

  out += "\nExact match by gold template\n";
  for (const auto& [kind, tally] : report.per_template) {
    std::snprintf(line, sizeof line, "  %-24s %8zu %12s\n", std::string(template_name(kind)).c_str(), tally.total,
                  format_percent(tally).c_str());
    out += line;
  }
  if (!report.complexity.empty()) {
    out += "\nArithmetic exact match by operator count\n";
    for (const auto& [ops, tally] : report.complexity) {
      std::snprintf(line, sizeof line, "  %-24d %8zu %12s\n", ops, tally.total, format_percent(tally).c_str());
      out += line;
    }
  }
  return out;
}

json report_to_json(const EvalReport& report) {
  json j;
  j["per_dataset_accuracy"] = json::object();
  for (const auto& [tag, t] : report.per_dataset) j["per_dataset_accuracy"][std::string(to_string(tag))] = tally_json(t);
  j["router_accuracy"] = json::object();
  for (const auto& [tag, t] : report.router) j["router_accuracy"][std::string(to_string(tag))] = tally_json(t);
  j["per_template_accuracy"] = json::object();
  for (const auto& [kind, t] : report.per_template) {
    j["per_template_accuracy"][std::string(template_name(kind))] = tally_json(t);
  }
  j["complexity_histogram"] = json::object();
  for (const auto& [ops, t] : report.complexity) {
    j["complexity_histogram"][std::to_string(ops)] = json{{"total", t.total}, {"correct", t.correct}};
  }
  j["backoff_usage"] = tally_json(report.backoff);
  return j;
}

}  // namespace toolqa::eval
