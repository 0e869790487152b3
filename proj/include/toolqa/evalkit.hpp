#pragma once

#include "toolqa/numeric.hpp"
#include "toolqa/pipeline.hpp"
#include "toolqa/templates.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace toolqa::eval {

struct NumericPart {
  Rational value;
  bool percent = false;
  int decimals = 0;  // fractional digits as written, after scale expansion

  // decimals is presentation only and takes no part in equality
  bool operator==(const NumericPart& o) const { return value == o.value && percent == o.percent; }
};

using AnswerPart = std::variant<std::string, NumericPart>;

/// Normalized answer: an ordered list of parts, each numeric or folded
/// text. A single-part answer is the common case.
struct CanonicalAnswer {
  std::vector<AnswerPart> parts;

  std::string text() const;
  bool operator==(const CanonicalAnswer&) const = default;
};

/// Case-folds, trims whitespace and terminal punctuation, splits
/// comma-separated lists (digit-group commas excepted) and reads each
/// part as a number where possible: currency symbols and thousands
/// separators dropped, "thousand"/"million"/"billion" expanded, a
/// trailing "%" or "percent" kept as a flag.
CanonicalAnswer normalize_answer(std::string_view text);

/// Part-wise, order-sensitive comparison of canonical forms. Numbers
/// match when, after bridging a percent flag on one side (x100), they
/// agree within 1e-6 relative, or the more precise side rounded to the
/// other's decimals equals it.
bool exact_match(std::string_view prediction, std::string_view gold);

struct Tally {
  std::size_t total = 0;
  std::size_t correct = 0;

  double fraction() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
  void add(bool ok) {
    ++total;
    correct += ok ? 1 : 0;
  }
  bool operator==(const Tally&) const = default;
};

struct EvalReport {
  std::map<DatasetTag, Tally> per_dataset;       // exact match
  std::map<DatasetTag, Tally> router;            // route == gold template
  std::map<TemplateKind, Tally> per_template;    // keyed by gold template
  std::map<int, Tally> complexity;               // arithmetic items by operator count
  Tally backoff;                                 // correct == used backoff

  bool operator==(const EvalReport&) const = default;
};

/// Reference answer for scoring: the response, or the evaluated
/// derivation when there is no response.
std::optional<std::string> gold_answer(const Record& record);

/// Throws Error{LengthMismatch} when the lists differ in length.
EvalReport score_run(const std::vector<DispatchOutcome>& outcomes, const std::vector<Record>& golds);

/// "51.35%" style, two decimals, half-up on exact counts.
std::string format_percent(const Tally& tally);

/// Plain-text table in TAT-QA, OTT-QA, Wiki-SQL, FPB order plus router
/// and backoff lines. An empty report renders the header only.
std::string render_report(const EvalReport& report);

nlohmann::json report_to_json(const EvalReport& report);

}  // namespace toolqa::eval
