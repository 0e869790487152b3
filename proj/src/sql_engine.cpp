#include "toolqa/sql_engine.hpp"

#include "toolqa/error.hpp"
#include "toolqa/strings.hpp"

#include <algorithm>
#include <array>

namespace toolqa::sql {

namespace {

enum class Tok { Word, Ident, String, Number, Symbol, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t offset;
};

constexpr std::array<std::string_view, 14> kStatementKeywords{
    "DROP", "INSERT", "UPDATE", "DELETE", "CREATE", "ALTER", "TRUNCATE",
    "WITH", "REPLACE", "PRAGMA", "ATTACH", "DETACH", "VACUUM", "MERGE"};

constexpr std::array<std::string_view, 17> kClauseKeywords{
    "JOIN", "INNER", "LEFT", "RIGHT", "FULL", "OUTER", "CROSS", "NATURAL", "ORDER",
    "GROUP", "LIMIT", "OFFSET", "HAVING", "UNION", "EXCEPT", "INTERSECT", "OR"};

template <std::size_t N>
bool contains_keyword(const std::array<std::string_view, N>& set, const std::string& word) {
  std::string upper = word;
  for (char& c : upper) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  return std::find(set.begin(), set.end(), upper) != set.end();
}

bool is_word_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

[[noreturn]] void parse_fail(const std::string& what, std::size_t offset) {
  throw Error(ErrorKind::ParseError, what + " at offset " + std::to_string(offset), "sql");
}

[[noreturn]] void unsupported(const std::string& what) {
  throw Error(ErrorKind::UnsupportedStatement, what, "sql");
}

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (is_word_start(c)) {
      while (i < s.size() && is_word_char(s[i])) ++i;
      out.push_back({Tok::Word, std::string(s.substr(start, i - start)), start});
    } else if (c == '[' || c == '"') {
      const char close = c == '[' ? ']' : '"';
      std::string name;
      ++i;
      for (;;) {
        if (i >= s.size()) parse_fail("unterminated identifier", start);
        if (s[i] == close) {
          if (i + 1 < s.size() && s[i + 1] == close) {
            name += close;
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        name += s[i++];
      }
      out.push_back({Tok::Ident, std::move(name), start});
    } else if (c == '\'') {
      std::string value;
      ++i;
      for (;;) {
        if (i >= s.size()) parse_fail("unterminated string literal", start);
        if (s[i] == '\'') {
          if (i + 1 < s.size() && s[i + 1] == '\'') {
            value += '\'';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        value += s[i++];
      }
      out.push_back({Tok::String, std::move(value), start});
    } else if (is_digit(c) || (c == '-' && i + 1 < s.size() && (is_digit(s[i + 1]) || s[i + 1] == '.')) ||
               (c == '.' && i + 1 < s.size() && is_digit(s[i + 1]))) {
      ++i;
      bool point = c == '.';
      while (i < s.size() && (is_digit(s[i]) || (s[i] == '.' && !point))) {
        point = point || s[i] == '.';
        ++i;
      }
      out.push_back({Tok::Number, std::string(s.substr(start, i - start)), start});
    } else if (std::string_view("()=<>*,;!").find(c) != std::string_view::npos) {
      out.push_back({Tok::Symbol, std::string(1, c), start});
      ++i;
    } else {
      parse_fail(std::string("unexpected character '") + c + "'", start);
    }
  }
  out.push_back({Tok::End, {}, s.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Query parse() {
    const Token& first = peek();
    if (first.kind != Tok::Word) parse_fail("expected SELECT", first.offset);
    if (!strings::iequals(first.text, "SELECT")) {
      if (contains_keyword(kStatementKeywords, first.text)) {
        unsupported("only SELECT statements are supported, got " + first.text);
      }
      parse_fail("expected SELECT, got '" + first.text + "'", first.offset);
    }
    next();
    Query q;
    if (is_word("DISTINCT")) unsupported("DISTINCT is not supported");
    if (is_symbol("*")) unsupported("SELECT * is not supported");
    if (peek().kind == Tok::Word && peek_at(1).kind == Tok::Symbol && peek_at(1).text == "(") {
      q.aggregate = aggregate_of(peek());
      next();
      next();
      if (is_symbol("*")) unsupported("COUNT(*) is not supported");
      q.projection = column();
      expect_symbol(")");
    } else {
      q.projection = column();
    }
    if (is_symbol(",")) unsupported("multiple projections are not supported");
    expect_word("FROM");
    if (is_symbol("(")) unsupported("subqueries are not supported");
    const Token& table = next();
    if ((table.kind != Tok::Word && table.kind != Tok::Ident) || !strings::iequals(table.text, "data_table")) {
      parse_fail("expected data_table", table.offset);
    }
    if (is_symbol(",")) unsupported("joins are not supported");
    if (is_word("WHERE")) {
      next();
      q.predicates.push_back(predicate());
      while (is_word("AND")) {
        next();
        q.predicates.push_back(predicate());
      }
    }
    if (is_symbol(";")) next();
    const Token& tail = peek();
    if (tail.kind != Tok::End) {
      if (tail.kind == Tok::Word && contains_keyword(kClauseKeywords, tail.text)) {
        unsupported(tail.text + " is not supported");
      }
      parse_fail("unexpected '" + tail.text + "'", tail.offset);
    }
    return q;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& peek_at(std::size_t k) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool is_word(std::string_view w) const {
    return peek().kind == Tok::Word && strings::iequals(peek().text, w);
  }
  bool is_symbol(std::string_view s) const {
    return peek().kind == Tok::Symbol && peek().text == s;
  }
  void expect_symbol(std::string_view s) {
    if (!is_symbol(s)) parse_fail("expected '" + std::string(s) + "'", peek().offset);
    next();
  }
  void expect_word(std::string_view w) {
    if (!is_word(w)) parse_fail("expected " + std::string(w), peek().offset);
    next();
  }

  static Aggregate aggregate_of(const Token& t) {
    const std::string u = strings::to_lower(t.text);
    if (u == "sum") return Aggregate::Sum;
    if (u == "count") return Aggregate::Count;
    if (u == "min") return Aggregate::Min;
    if (u == "max") return Aggregate::Max;
    if (u == "avg") return Aggregate::Avg;
    if (u == "lower" || u == "upper") parse_fail("function not allowed in projection", t.offset);
    unsupported("function " + t.text + " is not supported");
  }

  std::string column() {
    const Token& t = peek();
    if (t.kind == Tok::Ident) return next().text;
    if (t.kind == Tok::Word) {
      if (strings::iequals(t.text, "SELECT")) unsupported("nested queries are not supported");
      return next().text;
    }
    parse_fail("expected a column name", t.offset);
  }

  // LOWER( inner ) or inner; returns whether LOWER wrapped it.
  template <typename F>
  bool maybe_lower(F inner) {
    if (is_word("LOWER") && peek_at(1).kind == Tok::Symbol && peek_at(1).text == "(") {
      next();
      next();
      inner();
      expect_symbol(")");
      return true;
    }
    inner();
    return false;
  }

  Literal literal() {
    const Token& t = peek();
    if (t.kind == Tok::String) return next().text;
    if (t.kind == Tok::Number) return NumberLiteral{next().text};
    if (is_symbol("(") || is_word("SELECT")) unsupported("nested queries are not supported");
    parse_fail("expected a literal", t.offset);
  }

  Predicate predicate() {
    Predicate p;
    const std::size_t at = peek().offset;
    bool lowered = maybe_lower([&] { p.column = column(); });
    const Token& op = peek();
    if (op.kind != Tok::Symbol || (op.text != "=" && op.text != "<" && op.text != ">")) {
      if (op.kind == Tok::Word && (strings::iequals(op.text, "IN") || strings::iequals(op.text, "LIKE"))) {
        unsupported(op.text + " is not supported");
      }
      parse_fail("expected comparison operator", op.offset);
    }
    p.op = op.text == "=" ? CompareOp::Eq : op.text == "<" ? CompareOp::Lt : CompareOp::Gt;
    next();
    if (peek().kind == Tok::Symbol && (peek().text == "=" || peek().text == ">")) {
      parse_fail("compound comparison operators are not supported", peek().offset);
    }
    lowered = maybe_lower([&] { p.literal = literal(); }) || lowered;
    if (lowered && p.op != CompareOp::Eq) parse_fail("LOWER is only allowed with '='", at);
    p.fold_case = lowered;
    return p;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

bool matches(const Predicate& p, std::string_view cell, const std::optional<Rational>& lit_num,
             const std::string& lit_text) {
  auto cell_num = coerce_numeric(cell);
  if (cell_num && lit_num) {
    switch (p.op) {
      case CompareOp::Eq:
        return *cell_num == *lit_num;
      case CompareOp::Lt:
        return *cell_num < *lit_num;
      case CompareOp::Gt:
        return *cell_num > *lit_num;
    }
  }
  switch (p.op) {
    case CompareOp::Eq:
      return strings::to_lower(cell) == strings::to_lower(lit_text);
    case CompareOp::Lt:
      return cell < std::string_view(lit_text);
    case CompareOp::Gt:
      return cell > std::string_view(lit_text);
  }
  return false;
}

std::size_t require_column(const Table& table, const std::string& name) {
  auto idx = table.find_column(name);
  if (!idx) throw Error(ErrorKind::UnknownColumn, "no column named '" + name + "'", "execute");
  return *idx;
}

std::string quote_ident(const std::string& name) {
  std::string out = "[";
  for (char c : name) {
    out += c;
    if (c == ']') out += ']';
  }
  return out + "]";
}

std::string quote_string(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    out += c;
    if (c == '\'') out += '\'';
  }
  return out + "'";
}

}  // namespace

std::string_view to_string(Aggregate agg) {
  switch (agg) {
    case Aggregate::Sum:
      return "SUM";
    case Aggregate::Count:
      return "COUNT";
    case Aggregate::Min:
      return "MIN";
    case Aggregate::Max:
      return "MAX";
    case Aggregate::Avg:
      return "AVG";
  }
  return "";
}

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Eq:
      return "=";
    case CompareOp::Lt:
      return "<";
    case CompareOp::Gt:
      return ">";
  }
  return "";
}

std::string literal_text(const Literal& literal) {
  if (const auto* s = std::get_if<std::string>(&literal)) return *s;
  return std::get<NumberLiteral>(literal).text;
}

Query parse_sql(std::string_view text) { return Parser(tokenize(text)).parse(); }

QueryResult execute_query(const Query& query, const Table& table) {
  const std::size_t proj = require_column(table, query.projection);
  struct Bound {
    const Predicate* pred;
    std::size_t column;
    std::string text;
    std::optional<Rational> number;
  };
  std::vector<Bound> bound;
  for (const auto& p : query.predicates) {
    std::string text = literal_text(p.literal);
    auto number = coerce_numeric(text);
    bound.push_back({&p, require_column(table, p.column), std::move(text), std::move(number)});
  }

  std::vector<const Table::Row*> surviving;
  for (const auto& row : table.rows()) {
    bool keep = std::all_of(bound.begin(), bound.end(), [&](const Bound& b) {
      return matches(*b.pred, row[b.column], b.number, b.text);
    });
    if (keep) surviving.push_back(&row);
  }

  if (!query.aggregate) {
    TextList list;
    for (const auto* row : surviving) list.values.push_back((*row)[proj]);
    return list;
  }
  const Aggregate agg = *query.aggregate;
  if (agg == Aggregate::Count) return ScalarNumber{Rational(surviving.size())};

  const bool real = table.col_types()[proj] == ColumnType::Real;
  const std::string agg_name(to_string(agg));
  if (!real) {
    if (agg == Aggregate::Sum || agg == Aggregate::Avg) {
      throw Error(ErrorKind::TypeMismatch,
                  agg_name + " over text column '" + table.header()[proj] + "'", "execute");
    }
    std::optional<std::string> best;
    for (const auto* row : surviving) {
      const std::string& cell = (*row)[proj];
      if (strings::trim(cell).empty()) continue;
      if (!best || (agg == Aggregate::Min ? cell < *best : cell > *best)) best = cell;
    }
    if (!best) throw Error(ErrorKind::NoRows, agg_name + " over zero rows", "execute");
    return ScalarText{*best};
  }

  std::vector<Rational> values;
  for (const auto* row : surviving) {
    if (auto v = coerce_numeric((*row)[proj])) values.push_back(std::move(*v));
  }
  if (values.empty()) throw Error(ErrorKind::NoRows, agg_name + " over zero rows", "execute");
  switch (agg) {
    case Aggregate::Sum:
    case Aggregate::Avg: {
      Rational total = 0;
      for (const auto& v : values) total += v;
      if (agg == Aggregate::Avg) total /= Rational(values.size());
      return ScalarNumber{total};
    }
    case Aggregate::Min:
      return ScalarNumber{*std::min_element(values.begin(), values.end())};
    case Aggregate::Max:
      return ScalarNumber{*std::max_element(values.begin(), values.end())};
    case Aggregate::Count:
      break;
  }
  return ScalarNumber{Rational(surviving.size())};
}

std::string render_result(const QueryResult& result) {
  return std::visit(
      [](const auto& r) -> std::string {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, ScalarNumber>) {
          return format_decimal(r.value);
        } else if constexpr (std::is_same_v<T, ScalarText>) {
          return r.value;
        } else {
          return strings::join(r.values, ", ");
        }
      },
      result);
}

std::string run_script(std::string_view script, std::string_view table_text) {
  const Table table = parse_table(table_text);
  const Query query = parse_sql(script);
  return render_result(execute_query(query, table));
}

std::string render_query(const Query& query) {
  std::string out = "SELECT ";
  if (query.aggregate) {
    out += std::string(to_string(*query.aggregate)) + "(" + quote_ident(query.projection) + ")";
  } else {
    out += quote_ident(query.projection);
  }
  out += " FROM data_table";
  for (std::size_t i = 0; i < query.predicates.size(); ++i) {
    const Predicate& p = query.predicates[i];
    out += i == 0 ? " WHERE " : " AND ";
    std::string lit;
    if (const auto* s = std::get_if<std::string>(&p.literal)) {
      lit = quote_string(*s);
    } else {
      lit = std::get<NumberLiteral>(p.literal).text;
    }
    if (p.fold_case) {
      out += "LOWER(" + quote_ident(p.column) + ") = LOWER(" + lit + ")";
    } else {
      out += quote_ident(p.column) + " " + std::string(to_string(p.op)) + " " + lit;
    }
  }
  return out;
}

}  // namespace toolqa::sql
