#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace toolqa {

enum class ErrorKind {
  MalformedInput,
  RaggedRow,
  ParseError,
  DivisionByZero,
  UnsupportedStatement,
  UnknownColumn,
  TypeMismatch,
  NoRows,
  MissingAttribute,
  AmbiguousDerivation,
  UnknownTemplate,
  UnreadableFile,
  SchemaMismatch,
  EmptyInput,
  TransportError,
  MissingFixtureEntry,
  LengthMismatch,
};

std::string_view to_string(ErrorKind kind);

// Inverse of to_string; throws std::invalid_argument on unknown names.
ErrorKind error_kind_from_string(std::string_view name);

/// Tagged error raised by every module. `stage` names the pipeline stage
/// that failed ("table", "sql", "calc", ...) and may be empty.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, std::string stage = {});

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }
  const std::string& detail() const noexcept { return detail_; }

  // Same error re-tagged with a stage.
  Error with_stage(std::string stage) const;

 private:
  ErrorKind kind_;
  std::string stage_;
  std::string detail_;
};

}  // namespace toolqa
