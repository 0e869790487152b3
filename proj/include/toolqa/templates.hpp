#pragma once

#include "toolqa/tabular.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace toolqa {

enum class DatasetTag { TatQa, Fpb, WikiSql, OttQa };

// "tatqa", "fpb", "wikisql", "ottqa"
std::string_view to_string(DatasetTag tag);
std::optional<DatasetTag> dataset_tag_from_string(std::string_view name);
// Display name used in reports: "TAT-QA", "FPB", ...
std::string_view display_name(DatasetTag tag);

/// One normalized dataset example. `instruction` and one of
/// `derivation`/`response` are always present.
struct Record {
  std::string id;
  DatasetTag dataset = DatasetTag::TatQa;
  std::string instruction;
  std::optional<std::string> input;
  std::optional<Table> data;
  std::optional<std::string> derivation;  // arithmetic equation or SQL script
  std::optional<std::string> response;

  bool operator==(const Record&) const = default;
};

enum class TemplateKind { Arithmetic, Classification, Script, InformationExtraction, TemplateChoice };

/// Lowercase name as the router emits it ("information extraction").
std::string_view template_name(TemplateKind kind);

bool is_routable(TemplateKind kind);

struct CorpusExample {
  std::string prompt;
  std::string completion;
  bool operator==(const CorpusExample&) const = default;
};

/// Full prompt for `kind` up to and including its terminal header line.
/// Throws Error{MissingAttribute} for Script or InformationExtraction
/// without data.
std::string render_prompt(TemplateKind kind, const Record& record);

/// Script when the derivation is SQL, Arithmetic when it is an equation,
/// otherwise InformationExtraction (data present) or Classification.
/// Throws Error{AmbiguousDerivation} when a derivation parses under
/// neither grammar.
TemplateKind gold_template(const Record& record);

/// The direct-answer template used when no tool applies.
TemplateKind direct_template(const Record& record);

/// Derivation for tool templates, response otherwise.
std::string gold_completion(TemplateKind kind, const Record& record);

std::vector<CorpusExample> build_solver_corpus(const std::vector<Record>& records);
std::vector<CorpusExample> build_router_corpus(const std::vector<Record>& records);

/// Maps router output to one of the four routable kinds. Whitespace,
/// terminal punctuation and case are normalized; the whole output (or
/// its first non-empty line) must then equal a template name.
/// Throws Error{UnknownTemplate}.
TemplateKind parse_template_choice(std::string_view model_output);

}  // namespace toolqa
