#include "toolqa/pipeline.hpp"

#include "toolqa/calculator.hpp"
#include "toolqa/sql_engine.hpp"
#include "toolqa/strings.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace toolqa {

using nlohmann::json;

namespace {

std::string generate(const Backend& backend, std::string prompt) {
  return backend.generate(GenerationRequest{std::move(prompt)});
}

bool is_tool(TemplateKind kind) { return kind == TemplateKind::Arithmetic || kind == TemplateKind::Script; }

DispatchOutcome fall_back(const Record& record, const Backend& backend, TemplateKind routed, const Error& cause) {
  DispatchOutcome out = solve(record, direct_template(record), backend);
  out.route = routed;
  out.used_backoff = true;
  out.error = TaggedError::from(cause);
  return out;
}

DispatchOutcome answer(const Record& record, const Backend& backend, bool backoff) {
  TemplateKind kind;
  try {
    kind = route(record, backend);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::UnknownTemplate) throw;
    if (backoff) return fall_back(record, backend, direct_template(record), e);
    DispatchOutcome out;
    out.route = direct_template(record);
    out.error = TaggedError::from(e);
    return out;
  }

  DispatchOutcome out;
  try {
    out = solve(record, kind, backend);
  } catch (const Error& e) {
    // router picked a data-bearing template for a record without data
    if (e.kind() != ErrorKind::MissingAttribute) throw;
    if (backoff) return fall_back(record, backend, kind, e);
    out.route = kind;
    out.error = TaggedError::from(e);
    return out;
  }
  if (out.error && backoff) {
    return fall_back(record, backend, kind, Error(out.error->kind, out.error->message, out.error->stage));
  }
  return out;
}

}  // namespace

std::string clean_tool_argument(std::string_view raw) {
  std::string_view s = strings::trim(raw);
  if (!s.empty() && s.back() == '.') s = strings::trim(s.substr(0, s.size() - 1));
  return std::string(s);
}

TemplateKind route(const Record& record, const Backend& backend) {
  return parse_template_choice(generate(backend, render_prompt(TemplateKind::TemplateChoice, record)));
}

DispatchOutcome solve(const Record& record, TemplateKind kind, const Backend& backend) {
  if (!is_routable(kind)) throw std::invalid_argument("solve needs a routable template");
  DispatchOutcome out;
  out.route = kind;
  out.raw_model_output = generate(backend, render_prompt(kind, record));
  if (!is_tool(kind)) {
    out.final_answer = std::string(strings::trim(out.raw_model_output));
    return out;
  }
  const std::string argument = clean_tool_argument(out.raw_model_output);
  try {
    std::string result = kind == TemplateKind::Arithmetic
                             ? calc::run_calculator(argument)
                             : sql::run_script(argument, render_table(*record.data));
    out.tool_result = result;
    out.final_answer = std::move(result);
  } catch (const Error& e) {
    out.error = TaggedError::from(e);
  }
  return out;
}

DispatchOutcome answer_with_backoff(const Record& record, const Backend& backend) {
  return answer(record, backend, true);
}

DispatchOutcome answer_without_backoff(const Record& record, const Backend& backend) {
  return answer(record, backend, false);
}

std::vector<DispatchOutcome> run_batch(const std::vector<Record>& records, const Backend& backend,
                                       const BatchConfig& config) {
  std::vector<DispatchOutcome> outcomes(records.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      const Record& r = records[i];
      try {
        outcomes[i] = config.backoff ? answer_with_backoff(r, backend) : answer_without_backoff(r, backend);
      } catch (const Error& e) {
        outcomes[i] = DispatchOutcome{};
        outcomes[i].route = direct_template(r);
        outcomes[i].error = TaggedError::from(e);
      } catch (const std::exception& e) {
        outcomes[i] = DispatchOutcome{};
        outcomes[i].route = direct_template(r);
        outcomes[i].error = TaggedError{ErrorKind::TransportError, "batch", e.what()};
      }
    }
  };
  const std::size_t workers =
      std::min<std::size_t>(std::max(1, config.max_in_flight), std::max<std::size_t>(records.size(), 1));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  return outcomes;
}

std::optional<TemplateKind> template_kind_from_name(std::string_view name) {
  for (auto kind : {TemplateKind::Arithmetic, TemplateKind::Classification, TemplateKind::Script,
                    TemplateKind::InformationExtraction, TemplateKind::TemplateChoice}) {
    if (template_name(kind) == name) return kind;
  }
  return std::nullopt;
}

json outcome_to_json(const DispatchOutcome& o) {
  json j;
  j["route"] = std::string(template_name(o.route));
  j["raw_model_output"] = o.raw_model_output;
  j["tool_result"] = o.tool_result ? json(*o.tool_result) : json(nullptr);
  j["final_answer"] = o.final_answer ? json(*o.final_answer) : json(nullptr);
  j["used_backoff"] = o.used_backoff;
  if (o.error) {
    j["error"] = json{{"kind", std::string(to_string(o.error->kind))},
                      {"stage", o.error->stage},
                      {"message", o.error->message}};
  } else {
    j["error"] = nullptr;
  }
  return j;
}

DispatchOutcome outcome_from_json(const json& j) {
  auto fail = [](const std::string& what) { return Error(ErrorKind::SchemaMismatch, what, "outcomes"); };
  if (!j.is_object()) throw fail("outcome must be an object");
  DispatchOutcome o;
  auto kind = template_kind_from_name(j.value("route", std::string{}));
  if (!kind || !is_routable(*kind)) throw fail("bad route " + j.value("route", std::string{}));
  o.route = *kind;
  o.raw_model_output = j.value("raw_model_output", std::string{});
  if (j.contains("tool_result") && j["tool_result"].is_string()) o.tool_result = j["tool_result"].get<std::string>();
  if (j.contains("final_answer") && j["final_answer"].is_string()) o.final_answer = j["final_answer"].get<std::string>();
  o.used_backoff = j.value("used_backoff", false);
  if (j.contains("error") && j["error"].is_object()) {
    const json& e = j["error"];
    try {
      o.error = TaggedError{error_kind_from_string(e.value("kind", std::string{})), e.value("stage", std::string{}),
                            e.value("message", std::string{})};
    } catch (const std::invalid_argument& ex) {
      throw fail(ex.what());
    }
  }
  return o;
}

}  // namespace toolqa
