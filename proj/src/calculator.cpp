#include "toolqa/calculator.hpp"

#include "toolqa/error.hpp"

namespace toolqa::calc {

namespace {

constexpr int kMaxNesting = 200;
constexpr int kMaxOperators = 4096;

bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ExprPtr parse() {
    skip_space();
    if (pos_ == text_.size()) fail("empty expression");
    ExprPtr e = expr();
    skip_space();
    if (pos_ != text_.size()) fail(std::string("unexpected '") + text_[pos_] + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::ParseError, what + " at offset " + std::to_string(pos_), "calc");
  }

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  ExprPtr make_binary(BinaryOp op, ExprPtr l, ExprPtr r) {
    if (++operators_ > kMaxOperators) fail("too many operators");
    return std::make_unique<Expr>(Expr{Binary{op, std::move(l), std::move(r)}});
  }

  ExprPtr expr() {
    ExprPtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make_binary(BinaryOp::Add, std::move(lhs), term());
      } else if (accept('-')) {
        lhs = make_binary(BinaryOp::Sub, std::move(lhs), term());
      } else {
        return lhs;
      }
    }
  }

  ExprPtr term() {
    ExprPtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_binary(BinaryOp::Mul, std::move(lhs), unary());
      } else if (accept('/')) {
        lhs = make_binary(BinaryOp::Div, std::move(lhs), unary());
      } else {
        return lhs;
      }
    }
  }

  ExprPtr unary() {
    if (++depth_ > kMaxNesting) fail("expression nested too deeply");
    ExprPtr out;
    if (accept('-')) {
      out = std::make_unique<Expr>(Expr{Negate{unary()}});
    } else {
      out = primary();
    }
    --depth_;
    return out;
  }

  ExprPtr primary() {
    skip_space();
    if (accept('(')) {
      ExprPtr inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    return number();
  }

  ExprPtr number() {
    const std::size_t start = pos_;
    std::string digits;
    std::size_t group_len = 0;
    bool grouped = false;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (is_digit(c)) {
        digits += c;
        ++group_len;
        ++pos_;
      } else if (c == ',' && !digits.empty()) {
        if ((!grouped && group_len > 3) || (grouped && group_len != 3)) fail("bad digit grouping");
        grouped = true;
        group_len = 0;
        ++pos_;
      } else {
        break;
      }
    }
    if (grouped && group_len != 3) fail("bad digit grouping");
    if (pos_ < text_.size() && text_[pos_] == '.') {
      digits += '.';
      ++pos_;
      std::size_t frac_start = pos_;
      while (pos_ < text_.size() && is_digit(text_[pos_])) digits += text_[pos_++];
      if (pos_ == frac_start && digits.size() == 1) fail("expected a number");
    }
    if (digits.empty()) {
      pos_ = start;
      fail(pos_ < text_.size() ? std::string("unexpected '") + text_[pos_] + "'"
                               : std::string("unexpected end of input"));
    }
    if (pos_ < text_.size() && (text_[pos_] == '%' || text_[pos_] == '.' || text_[pos_] == ',')) {
      fail(std::string("unexpected '") + text_[pos_] + "'");
    }
    auto value = parse_plain_decimal(digits);
    if (!value) fail("bad numeral");
    return std::make_unique<Expr>(Expr{NumberLiteral{*value}});
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  int operators_ = 0;
};

}  // namespace

ExprPtr parse_expression(std::string_view text) { return Parser(text).parse(); }

Rational evaluate(const Expr& expr) {
  return std::visit(
      [](const auto& node) -> Rational {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, NumberLiteral>) {
          return node.value;
        } else if constexpr (std::is_same_v<T, Negate>) {
          return -evaluate(*node.operand);
        } else {
          Rational l = evaluate(*node.left);
          Rational r = evaluate(*node.right);
          switch (node.op) {
            case BinaryOp::Add:
              return l + r;
            case BinaryOp::Sub:
              return l - r;
            case BinaryOp::Mul:
              return l * r;
            case BinaryOp::Div:
              if (r == 0) throw Error(ErrorKind::DivisionByZero, "division by zero", "calc");
              return l / r;
          }
          return 0;
        }
      },
      expr.node);
}

Rational evaluate_expression(std::string_view text) { return evaluate(*parse_expression(text)); }

std::string run_calculator(std::string_view text) {
  return format_decimal(evaluate_expression(text));
}

int count_binary_nodes(const Expr& expr) {
  return std::visit(
      [](const auto& node) -> int {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, NumberLiteral>) {
          return 0;
        } else if constexpr (std::is_same_v<T, Negate>) {
          return count_binary_nodes(*node.operand);
        } else {
          return 1 + count_binary_nodes(*node.left) + count_binary_nodes(*node.right);
        }
      },
      expr.node);
}

int expression_complexity(std::string_view text) {
  return count_binary_nodes(*parse_expression(text));
}

}  // namespace toolqa::calc
