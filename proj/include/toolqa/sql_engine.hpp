#pragma once

#include "toolqa/numeric.hpp"
#include "toolqa/tabular.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace toolqa::sql {

enum class Aggregate { Sum, Count, Min, Max, Avg };
enum class CompareOp { Eq, Lt, Gt };

std::string_view to_string(Aggregate agg);
std::string_view to_string(CompareOp op);

struct NumberLiteral {
  std::string text;  // as written, e.g. "5000" or "-1.5"
  bool operator==(const NumberLiteral&) const = default;
};

/// Right-hand side of a predicate: a quoted string or a bare numeral.
using Literal = std::variant<std::string, NumberLiteral>;

std::string literal_text(const Literal& literal);

struct Predicate {
  std::string column;
  CompareOp op = CompareOp::Eq;
  Literal literal;
  bool fold_case = false;  // LOWER(...) appeared; only with CompareOp::Eq
  bool operator==(const Predicate&) const = default;
};

struct Query {
  std::optional<Aggregate> aggregate;
  std::string projection;
  std::vector<Predicate> predicates;
  bool operator==(const Query&) const = default;
};

struct ScalarNumber {
  Rational value;
  bool operator==(const ScalarNumber&) const = default;
};
struct ScalarText {
  std::string value;
  bool operator==(const ScalarText&) const = default;
};
struct TextList {
  std::vector<std::string> values;
  bool operator==(const TextList&) const = default;
};

using QueryResult = std::variant<ScalarNumber, ScalarText, TextList>;

/// Accepts exactly
///   SELECT [AGG(] col [)] FROM data_table [WHERE pred (AND pred)*] [;]
/// with pred one of `col op literal` or `LOWER(col) = LOWER('text')`
/// (either LOWER may be omitted). Columns are `[Bracketed Names]` or bare
/// words; keywords are case-insensitive.
/// Throws Error{UnsupportedStatement} for DDL/DML, joins, ordering,
/// grouping, nesting; Error{ParseError} otherwise.
Query parse_sql(std::string_view text);

/// Throws Error{UnknownColumn|TypeMismatch|NoRows}.
QueryResult execute_query(const Query& query, const Table& table);

/// Numbers as decimals, text verbatim, lists joined with ", ".
std::string render_result(const QueryResult& result);

/// Tool surface: table text and script in, answer text out. Errors carry
/// the failing stage ("table", "sql" or "execute").
std::string run_script(std::string_view script, std::string_view table_text);

/// Canonical SQL text for a query; parse_sql(render_query(q)) == q.
std::string render_query(const Query& query);

}  // namespace toolqa::sql
