#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace toolqa {

/// Exact rational used for every numeric value the tools produce.
using Rational = boost::multiprecision::cpp_rational;

/// Parses a plain decimal numeral: optional sign, digits, optional
/// fraction ("-12", "0.74", ".5", "3."). No separators, no exponent.
std::optional<Rational> parse_plain_decimal(std::string_view text);

Rational pow10(int exponent);

/// Rounds to `decimals` fractional digits, halves away from zero.
Rational round_to_decimals(const Rational& value, int decimals);

/// Decimal rendering with trailing zeros trimmed. For |v| >= 1 at most
/// `max_fraction` fractional digits are kept; for 0 < |v| < 1 the count
/// starts at the first non-zero fractional digit.
std::string format_decimal(const Rational& value, int max_fraction = 10);

/// Exact rendering of a rational whose denominator divides a power of ten.
/// Returns nullopt for non-terminating expansions.
std::optional<std::string> format_exact_decimal(const Rational& value);

double to_double(const Rational& value);

}  // namespace toolqa
