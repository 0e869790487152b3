#pragma once

#include "toolqa/numeric.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace toolqa {

enum class ColumnType { Text, Real };

std::string_view to_string(ColumnType type);

/// Structured context attached to a question: a header, string cells and
/// one type per column. Immutable once built.
///
/// Column types are either declared by the source ("types" key) or
/// inferred: a column is Real when every non-empty cell passes
/// coerce_numeric. `declared_types()` records which, so that rendering
/// reproduces the source form.
class Table {
 public:
  using Row = std::vector<std::string>;

  Table() = default;

  /// Throws Error{RaggedRow} when a row's arity differs from the header,
  /// Error{MalformedInput} when `types` has the wrong length.
  Table(std::vector<std::string> header, std::vector<Row> rows,
        std::optional<std::vector<ColumnType>> types = std::nullopt,
        std::optional<std::string> caption = std::nullopt);

  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::vector<Row>& rows() const noexcept { return rows_; }
  const std::vector<ColumnType>& col_types() const noexcept { return col_types_; }
  const std::optional<std::string>& caption() const noexcept { return caption_; }
  bool declared_types() const noexcept { return declared_types_; }

  std::size_t column_count() const noexcept { return header_.size(); }
  std::size_t row_count() const noexcept { return rows_.size(); }

  /// Exact header match first, then a unique case-insensitive match.
  std::optional<std::size_t> find_column(std::string_view name) const;

  bool operator==(const Table&) const = default;

 private:
  std::vector<std::string> header_;
  std::vector<Row> rows_;
  std::vector<ColumnType> col_types_;
  std::optional<std::string> caption_;
  bool declared_types_ = false;
};

/// Numeric value of a cell, or nullopt. Accepts surrounding whitespace,
/// thousands separators in 3-digit groups, one leading currency symbol
/// ($, €, £), a leading minus and accounting parentheses: "(301)" is -301.
std::optional<Rational> coerce_numeric(std::string_view cell);

std::vector<ColumnType> infer_column_types(std::size_t columns,
                                           const std::vector<Table::Row>& rows);

/// Reads the serialized object form {"header", "rows", "types"?, "caption"?}.
/// Numeric cells are read as their decimal rendering.
Table parse_table(std::string_view text);

/// Compact single-line object form; inverse of parse_table.
std::string render_table(const Table& table);

}  // namespace toolqa
