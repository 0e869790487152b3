#include "toolqa/tabular.hpp"

#include "toolqa/error.hpp"
#include "toolqa/strings.hpp"

#include <nlohmann/json.hpp>

#include <array>

namespace toolqa {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 3> kCurrencySymbols{"$", "\xE2\x82\xAC", "\xC2\xA3"};

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Integer part with optional 3-digit comma groups, optional fraction.
bool valid_numeral(std::string_view s) {
  if (s.empty()) return false;
  std::size_t point = s.find('.');
  std::string_view int_part = s.substr(0, point);
  std::string_view frac = point == std::string_view::npos ? std::string_view{} : s.substr(point + 1);
  for (char c : frac) {
    if (!is_digit(c)) return false;
  }
  if (int_part.empty()) return !frac.empty();
  if (int_part.find(',') == std::string_view::npos) {
    for (char c : int_part) {
      if (!is_digit(c)) return false;
    }
    return true;
  }
  std::size_t first = int_part.find(',');
  if (first == 0 || first > 3) return false;
  for (std::size_t i = 0; i < first; ++i) {
    if (!is_digit(int_part[i])) return false;
  }
  std::size_t pos = first;
  while (pos < int_part.size()) {
    if (int_part[pos] != ',' || pos + 4 > int_part.size()) return false;
    for (std::size_t k = 1; k <= 3; ++k) {
      if (!is_digit(int_part[pos + k])) return false;
    }
    pos += 4;
  }
  return true;
}

std::string cell_text(const json& cell) {
  switch (cell.type()) {
    case json::value_t::string:
      return cell.get<std::string>();
    case json::value_t::number_integer:
    case json::value_t::number_unsigned:
    case json::value_t::number_float:
      return cell.dump();
    case json::value_t::null:
      return {};
    default:
      throw Error(ErrorKind::MalformedInput, "cell must be a string or number: " + cell.dump(), "table");
  }
}

std::string quote(const std::string& s) {
  return json(s).dump(-1, ' ', false, json::error_handler_t::replace);
}

void append_list(std::string& out, const std::vector<std::string>& items) {
  out += '[';
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += quote(items[i]);
  }
  out += ']';
}

}  // namespace

std::string_view to_string(ColumnType type) {
  return type == ColumnType::Real ? "real" : "text";
}

Table::Table(std::vector<std::string> header, std::vector<Row> rows,
             std::optional<std::vector<ColumnType>> types,
             std::optional<std::string> caption)
    : header_(std::move(header)), rows_(std::move(rows)), caption_(std::move(caption)) {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].size() != header_.size()) {
      throw Error(ErrorKind::RaggedRow,
                  "row " + std::to_string(i) + " has " + std::to_string(rows_[i].size()) +
                      " cells, header has " + std::to_string(header_.size()),
                  "table");
    }
  }
  if (types) {
    if (types->size() != header_.size()) {
      throw Error(ErrorKind::MalformedInput, "\"types\" length differs from header", "table");
    }
    col_types_ = std::move(*types);
    declared_types_ = true;
  } else {
    col_types_ = infer_column_types(header_.size(), rows_);
  }
}

std::optional<std::size_t> Table::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  std::optional<std::size_t> hit;
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (strings::iequals(header_[i], name)) {
      if (hit) return std::nullopt;
      hit = i;
    }
  }
  return hit;
}

std::optional<Rational> coerce_numeric(std::string_view cell) {
  std::string_view s = strings::trim(cell);
  bool negative = false;
  bool used_paren = false, used_minus = false, used_currency = false;
  for (bool changed = true; changed && !s.empty();) {
    changed = false;
    if (!used_paren && s.size() >= 2 && s.front() == '(' && s.back() == ')') {
      s = strings::trim(s.substr(1, s.size() - 2));
      negative = !negative;
      used_paren = changed = true;
      continue;
    }
    if (!used_minus && s.front() == '-') {
      s = strings::trim(s.substr(1));
      negative = !negative;
      used_minus = changed = true;
      continue;
    }
    if (!used_currency) {
      for (auto sym : kCurrencySymbols) {
        if (s.substr(0, sym.size()) == sym) {
          s = strings::trim(s.substr(sym.size()));
          used_currency = changed = true;
          break;
        }
      }
    }
  }
  if (!valid_numeral(s)) return std::nullopt;
  std::string plain;
  for (char c : s) {
    if (c != ',') plain += c;
  }
  auto value = parse_plain_decimal(plain);
  if (!value) return std::nullopt;
  return negative ? Rational(-*value) : *value;
}

std::vector<ColumnType> infer_column_types(std::size_t columns,
                                           const std::vector<Table::Row>& rows) {
  std::vector<ColumnType> types(columns, ColumnType::Real);
  for (std::size_t c = 0; c < columns; ++c) {
    for (const auto& row : rows) {
      const std::string& cell = row.at(c);
      if (strings::trim(cell).empty()) continue;
      if (!coerce_numeric(cell)) {
        types[c] = ColumnType::Text;
        break;
      }
    }
  }
  return types;
}

Table parse_table(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::MalformedInput, e.what(), "table");
  }
  if (!doc.is_object() || !doc.contains("header") || !doc.contains("rows")) {
    throw Error(ErrorKind::MalformedInput, "expected an object with \"header\" and \"rows\"", "table");
  }
  const json& jheader = doc["header"];
  const json& jrows = doc["rows"];
  if (!jheader.is_array() || !jrows.is_array()) {
    throw Error(ErrorKind::MalformedInput, "\"header\" and \"rows\" must be arrays", "table");
  }
  std::vector<std::string> header;
  for (const auto& h : jheader) header.push_back(cell_text(h));
  std::vector<Table::Row> rows;
  for (const auto& jrow : jrows) {
    if (!jrow.is_array()) {
      throw Error(ErrorKind::MalformedInput, "each row must be an array", "table");
    }
    Table::Row row;
    for (const auto& cell : jrow) row.push_back(cell_text(cell));
    rows.push_back(std::move(row));
  }
  std::optional<std::vector<ColumnType>> types;
  if (doc.contains("types") && !doc["types"].is_null()) {
    if (!doc["types"].is_array()) {
      throw Error(ErrorKind::MalformedInput, "\"types\" must be an array", "table");
    }
    types.emplace();
    for (const auto& t : doc["types"]) {
      if (t == "real") {
        types->push_back(ColumnType::Real);
      } else if (t == "text") {
        types->push_back(ColumnType::Text);
      } else {
        throw Error(ErrorKind::MalformedInput, "unknown column type " + t.dump(), "table");
      }
    }
  }
  std::optional<std::string> caption;
  if (doc.contains("caption") && !doc["caption"].is_null()) {
    if (!doc["caption"].is_string()) {
      throw Error(ErrorKind::MalformedInput, "\"caption\" must be a string", "table");
    }
    caption = doc["caption"].get<std::string>();
  }
  return Table(std::move(header), std::move(rows), std::move(types), std::move(caption));
}

std::string render_table(const Table& table) {
  std::string out = "{\"header\": ";
  append_list(out, table.header());
  out += ", \"rows\": [";
  for (std::size_t i = 0; i < table.rows().size(); ++i) {
    if (i) out += ", ";
    append_list(out, table.rows()[i]);
  }
  out += ']';
  if (table.declared_types()) {
    std::vector<std::string> names;
    for (auto t : table.col_types()) names.emplace_back(to_string(t));
    out += ", \"types\": ";
    append_list(out, names);
  }
  if (table.caption()) {
    out += ", \"caption\": " + quote(*table.caption());
  }
  out += '}';
  return out;
}

}  // namespace toolqa
