#include "toolqa/error.hpp"

#include <array>
#include <utility>

namespace toolqa {

namespace {

constexpr std::array<std::pair<ErrorKind, std::string_view>, 17> kNames{{
    {ErrorKind::MalformedInput, "MalformedInput"},
    {ErrorKind::RaggedRow, "RaggedRow"},
    {ErrorKind::ParseError, "ParseError"},
    {ErrorKind::DivisionByZero, "DivisionByZero"},
    {ErrorKind::UnsupportedStatement, "UnsupportedStatement"},
    {ErrorKind::UnknownColumn, "UnknownColumn"},
    {ErrorKind::TypeMismatch, "TypeMismatch"},
    {ErrorKind::NoRows, "NoRows"},
    {ErrorKind::MissingAttribute, "MissingAttribute"},
    {ErrorKind::AmbiguousDerivation, "AmbiguousDerivation"},
    {ErrorKind::UnknownTemplate, "UnknownTemplate"},
    {ErrorKind::UnreadableFile, "UnreadableFile"},
    {ErrorKind::SchemaMismatch, "SchemaMismatch"},
    {ErrorKind::EmptyInput, "EmptyInput"},
    {ErrorKind::TransportError, "TransportError"},
    {ErrorKind::MissingFixtureEntry, "MissingFixtureEntry"},
    {ErrorKind::LengthMismatch, "LengthMismatch"},
}};

std::string compose(ErrorKind kind, const std::string& stage,
                    const std::string& message) {
  std::string out(to_string(kind));
  if (!stage.empty()) out += " (" + stage + ")";
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

std::string_view to_string(ErrorKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "Unknown";
}

ErrorKind error_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  throw std::invalid_argument("unknown error kind: " + std::string(name));
}

Error::Error(ErrorKind kind, std::string message, std::string stage)
    : std::runtime_error(compose(kind, stage, message)),
      kind_(kind),
      stage_(std::move(stage)),
      detail_(std::move(message)) {}

Error Error::with_stage(std::string stage) const {
  return Error(kind_, detail_, std::move(stage));
}

}  // namespace toolqa
