#include "toolqa/templates.hpp"

#include "toolqa/calculator.hpp"
#include "toolqa/error.hpp"
#include "toolqa/sql_engine.hpp"
#include "toolqa/strings.hpp"

#include <array>

namespace toolqa {

namespace {

// Preamble wording, copied verbatim from the trained templates. Context
// clauses vary with the attributes a record carries.
constexpr std::string_view kBelowIs = "Below is an instruction that describes a task";
constexpr std::string_view kArithmeticTask = "Formulate an arithmetic equation to generate the answer.";
constexpr std::string_view kScriptTask =
    "Compose an SQL script capable of being run on the data to generate the solution.";
constexpr std::string_view kClassificationTask = "Write a response that appropriately completes the request.";
constexpr std::string_view kExtractionLead = "Here is a instruction detailing a task";
constexpr std::string_view kExtractionTask = "Provide a suitable reply that effectively fulfills the inquiry.";
constexpr std::string_view kChoiceTask = "Which template is best suited to fulfil this inquiry.";

struct Context {
  bool input;
  bool data;
};

std::string arithmetic_preamble(Context c) {
  std::string out(kBelowIs);
  if (c.input && c.data) {
    out += ", coupled with input and data providing additional context";
  } else if (c.data) {
    out += ", coupled with data providing additional context";
  } else if (c.input) {
    out += ", coupled with input providing additional context";
  }
  return out + ". " + std::string(kArithmeticTask);
}

std::string script_preamble(Context c) {
  std::string out(kBelowIs);
  out += c.input ? ", coupled with input and contextual data" : ", coupled with contextual data";
  return out + ". " + std::string(kScriptTask);
}

std::string classification_preamble(Context c) {
  std::string out(kBelowIs);
  if (c.input && c.data) {
    out += ", paired with an input and data that provide further context";
  } else if (c.input) {
    out += ", paired with an input that provides further context";
  } else if (c.data) {
    out += ", paired with data that provides further context";
  }
  return out + ". " + std::string(kClassificationTask);
}

std::string extraction_preamble(Context c) {
  std::string out(kExtractionLead);
  out += c.input ? ", accompanied by input and data providing additional context"
                 : ", accompanied by data providing additional context";
  return out + ". " + std::string(kExtractionTask);
}

std::string choice_preamble(Context c) {
  std::string_view attrs = c.input && c.data ? "Here is a instruction, input and data detailing a task."
                           : c.data          ? "Here is a instruction and data detailing a task."
                           : c.input         ? "Here is a instruction and input detailing a task."
                                             : "Here is a instruction detailing a task.";
  return std::string(attrs) + " " + std::string(kChoiceTask);
}

std::string_view terminal_header(TemplateKind kind) {
  switch (kind) {
    case TemplateKind::Arithmetic:
      return "### Equation:";
    case TemplateKind::Script:
      return "### SQL:";
    case TemplateKind::Classification:
    case TemplateKind::InformationExtraction:
      return "### Response:";
    case TemplateKind::TemplateChoice:
      return "### Template:";
  }
  return "";
}

bool parses_as_sql(std::string_view text) {
  try {
    sql::parse_sql(text);
    return true;
  } catch (const Error&) {
    return false;
  }
}

bool parses_as_arithmetic(std::string_view text) {
  try {
    calc::parse_expression(text);
    return true;
  } catch (const Error&) {
    return false;
  }
}

constexpr std::array<TemplateKind, 4> kRoutable{TemplateKind::Arithmetic, TemplateKind::Classification,
                                                TemplateKind::Script, TemplateKind::InformationExtraction};

std::string normalize_choice(std::string_view text) {
  std::string s = strings::collapse_spaces(strings::to_lower(text));
  while (!s.empty() && std::string_view(".!?,;:\"'`*").find(s.back()) != std::string_view::npos) {
    s.pop_back();
    s = std::string(strings::trim(s));
  }
  while (!s.empty() && std::string_view("\"'`*").find(s.front()) != std::string_view::npos) {
    s.erase(0, 1);
    s = std::string(strings::trim(s));
  }
  return s;
}

std::optional<TemplateKind> match_choice(std::string_view text) {
  const std::string s = normalize_choice(text);
  for (auto kind : kRoutable) {
    if (s == template_name(kind)) return kind;
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(DatasetTag tag) {
  switch (tag) {
    case DatasetTag::TatQa:
      return "tatqa";
    case DatasetTag::Fpb:
      return "fpb";
    case DatasetTag::WikiSql:
      return "wikisql";
    case DatasetTag::OttQa:
      return "ottqa";
  }
  return "";
}

std::optional<DatasetTag> dataset_tag_from_string(std::string_view name) {
  for (auto tag : {DatasetTag::TatQa, DatasetTag::Fpb, DatasetTag::WikiSql, DatasetTag::OttQa}) {
    if (to_string(tag) == name) return tag;
  }
  return std::nullopt;
}

std::string_view display_name(DatasetTag tag) {
  switch (tag) {
    case DatasetTag::TatQa:
      return "TAT-QA";
    case DatasetTag::Fpb:
      return "FPB";
    case DatasetTag::WikiSql:
      return "Wiki-SQL";
    case DatasetTag::OttQa:
      return "OTT-QA";
  }
  return "";
}

std::string_view template_name(TemplateKind kind) {
  switch (kind) {
    case TemplateKind::Arithmetic:
      return "arithmetic";
    case TemplateKind::Classification:
      return "classification";
    case TemplateKind::Script:
      return "script";
    case TemplateKind::InformationExtraction:
      return "information extraction";
    case TemplateKind::TemplateChoice:
      return "template choice";
  }
  return "";
}

bool is_routable(TemplateKind kind) { return kind != TemplateKind::TemplateChoice; }

std::string render_prompt(TemplateKind kind, const Record& record) {
  const Context ctx{record.input.has_value(), record.data.has_value()};
  std::string preamble;
  switch (kind) {
    case TemplateKind::Arithmetic:
      preamble = arithmetic_preamble(ctx);
      break;
    case TemplateKind::Classification:
      preamble = classification_preamble(ctx);
      break;
    case TemplateKind::Script:
    case TemplateKind::InformationExtraction:
      if (!ctx.data) {
        throw Error(ErrorKind::MissingAttribute,
                    "template '" + std::string(template_name(kind)) + "' needs data; record " + record.id + " has none",
                    "render");
      }
      preamble = kind == TemplateKind::Script ? script_preamble(ctx) : extraction_preamble(ctx);
      break;
    case TemplateKind::TemplateChoice:
      preamble = choice_preamble(ctx);
      break;
  }

  std::string out = preamble;
  out += "\n\n### Instruction:\n";
  out += record.instruction;
  if (record.input) {
    out += "\n\n### Input:\n";
    out += *record.input;
  }
  if (record.data) {
    out += "\n\n### Data:\n";
    out += render_table(*record.data);
  }
  out += "\n\n";
  out += terminal_header(kind);
  out += '\n';
  return out;
}

TemplateKind gold_template(const Record& record) {
  if (record.derivation) {
    const bool sql = parses_as_sql(*record.derivation);
    const bool arithmetic = parses_as_arithmetic(*record.derivation);
    if (sql && arithmetic) {
      return record.dataset == DatasetTag::WikiSql ? TemplateKind::Script : TemplateKind::Arithmetic;
    }
    if (sql) return TemplateKind::Script;
    if (arithmetic) return TemplateKind::Arithmetic;
    throw Error(ErrorKind::AmbiguousDerivation,
                "derivation of record " + record.id + " is neither SQL nor arithmetic: " + *record.derivation,
                "label");
  }
  return direct_template(record);
}

TemplateKind direct_template(const Record& record) {
  return record.data ? TemplateKind::InformationExtraction : TemplateKind::Classification;
}

std::string gold_completion(TemplateKind kind, const Record& record) {
  if (kind == TemplateKind::TemplateChoice) return std::string(template_name(gold_template(record)));
  const bool tool = kind == TemplateKind::Arithmetic || kind == TemplateKind::Script;
  const auto& field = tool ? record.derivation : record.response;
  if (!field || field->empty()) {
    throw Error(ErrorKind::MissingAttribute,
                std::string("record ") + record.id + " has no " + (tool ? "derivation" : "response"), "label");
  }
  return *field;
}

std::vector<CorpusExample> build_solver_corpus(const std::vector<Record>& records) {
  std::vector<CorpusExample> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const TemplateKind kind = gold_template(r);
    out.push_back({render_prompt(kind, r), gold_completion(kind, r)});
  }
  return out;
}

std::vector<CorpusExample> build_router_corpus(const std::vector<Record>& records) {
  std::vector<CorpusExample> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    out.push_back({render_prompt(TemplateKind::TemplateChoice, r), std::string(template_name(gold_template(r)))});
  }
  return out;
}

TemplateKind parse_template_choice(std::string_view model_output) {
  if (auto kind = match_choice(model_output)) return *kind;
  std::string_view rest = model_output;
  while (!rest.empty()) {
    const std::size_t nl = rest.find('\n');
    std::string_view line = strings::trim(rest.substr(0, nl));
    if (!line.empty()) {
      if (auto kind = match_choice(line)) return *kind;
      break;
    }
    if (nl == std::string_view::npos) break;
    rest.remove_prefix(nl + 1);
  }
  throw Error(ErrorKind::UnknownTemplate, "unrecognized template choice: '" + std::string(model_output) + "'",
              "route");
}

}  // namespace toolqa
