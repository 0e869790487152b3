#pragma once

#include "toolqa/numeric.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <variant>

namespace toolqa::calc {

enum class BinaryOp { Add, Sub, Mul, Div };

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct NumberLiteral {
  Rational value;
};

struct Binary {
  BinaryOp op;
  ExprPtr left;
  ExprPtr right;
};

struct Negate {
  ExprPtr operand;
};

struct Expr {
  std::variant<NumberLiteral, Binary, Negate> node;
};

/// Grammar:
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | primary
///   primary := numeral | '(' expr ')'
/// Numerals may group their integer part with commas in threes
/// ("578,806"). Anything else, including '%', is a ParseError.
ExprPtr parse_expression(std::string_view text);

/// Exact evaluation. Throws Error{DivisionByZero}.
Rational evaluate(const Expr& expr);

/// Parses and evaluates exactly. Throws Error{ParseError|DivisionByZero}.
Rational evaluate_expression(std::string_view text);

/// Tool surface: one expression in, decimal string out.
std::string run_calculator(std::string_view text);

/// Number of binary operators in the parsed expression.
int expression_complexity(std::string_view text);

int count_binary_nodes(const Expr& expr);

}  // namespace toolqa::calc
