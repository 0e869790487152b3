#pragma once

#include "toolqa/error.hpp"
#include "toolqa/lm_backend.hpp"
#include "toolqa/templates.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace toolqa {

struct TaggedError {
  ErrorKind kind = ErrorKind::ParseError;
  std::string stage;
  std::string message;

  static TaggedError from(const Error& e) { return {e.kind(), e.stage(), e.detail()}; }
  bool operator==(const TaggedError&) const = default;
};

/// What happened to one record. `route` is the template the router
/// picked (or the direct-answer template when routing failed). When
/// `used_backoff` is set, `error` keeps the failure that triggered it.
struct DispatchOutcome {
  TemplateKind route = TemplateKind::Classification;
  std::string raw_model_output;
  std::optional<std::string> tool_result;
  std::optional<std::string> final_answer;
  bool used_backoff = false;
  std::optional<TaggedError> error;

  bool operator==(const DispatchOutcome&) const = default;
};

struct BatchConfig {
  int max_in_flight = 4;
  bool backoff = true;
};

/// Whitespace and one trailing period removed.
std::string clean_tool_argument(std::string_view raw);

/// Router step. Throws Error{UnknownTemplate} and backend errors.
TemplateKind route(const Record& record, const Backend& backend);

/// Solver step for a routed template. Tool failures land in
/// outcome.error; backend errors and Error{MissingAttribute} (Script or
/// InformationExtraction without data) are thrown.
DispatchOutcome solve(const Record& record, TemplateKind kind, const Backend& backend);

/// Route then solve; a routing failure or tool failure re-asks the model
/// through the direct-answer template. Only backend errors propagate.
DispatchOutcome answer_with_backoff(const Record& record, const Backend& backend);

/// Route then solve with no fallback; failures stay in outcome.error.
DispatchOutcome answer_without_backoff(const Record& record, const Backend& backend);

/// One outcome per record, in input order. At most max_in_flight records
/// are in progress at once; per-record errors never abort the batch.
std::vector<DispatchOutcome> run_batch(const std::vector<Record>& records, const Backend& backend,
                                       const BatchConfig& config = {});

nlohmann::json outcome_to_json(const DispatchOutcome& outcome);
DispatchOutcome outcome_from_json(const nlohmann::json& j);
std::optional<TemplateKind> template_kind_from_name(std::string_view name);

}  // namespace toolqa
