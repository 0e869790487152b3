#include "toolqa/numeric.hpp"

#include <cctype>

namespace toolqa {

namespace {

using boost::multiprecision::cpp_int;

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Integer part and fraction digits of |value| rounded to `decimals` places.
std::pair<cpp_int, std::string> split_rounded(const Rational& magnitude,
                                              int decimals) {
  cpp_int scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  cpp_int num = boost::multiprecision::numerator(magnitude) * scale;
  cpp_int den = boost::multiprecision::denominator(magnitude);
  cpp_int q = num / den;
  cpp_int r = num % den;
  if (r * 2 >= den) ++q;
  cpp_int int_part = q / scale;
  cpp_int frac = q % scale;
  std::string frac_digits;
  if (decimals > 0) {
    frac_digits = frac.str();
    frac_digits.insert(0, static_cast<std::size_t>(decimals) - frac_digits.size(), '0');
  }
  return {int_part, frac_digits};
}

}  // namespace

std::optional<Rational> parse_plain_decimal(std::string_view text) {
  if (text.empty()) return std::nullopt;
  bool negative = false;
  std::size_t i = 0;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    ++i;
  }
  cpp_int digits = 0;
  int fraction_len = 0;
  bool any_digit = false;
  bool seen_point = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (is_digit(c)) {
      digits = digits * 10 + (c - '0');
      any_digit = true;
      if (seen_point) ++fraction_len;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      return std::nullopt;
    }
  }
  if (!any_digit) return std::nullopt;
  Rational value(digits);
  value /= pow10(fraction_len);
  return negative ? Rational(-value) : value;
}

Rational pow10(int exponent) {
  cpp_int p = 1;
  for (int i = 0; i < (exponent < 0 ? -exponent : exponent); ++i) p *= 10;
  return exponent >= 0 ? Rational(p) : Rational(cpp_int(1), p);
}

Rational round_to_decimals(const Rational& value, int decimals) {
  const bool negative = value < 0;
  auto [int_part, frac] = split_rounded(negative ? Rational(-value) : value, decimals);
  Rational out(int_part);
  // no cpp_int(string) here: a leading zero would select octal
  cpp_int frac_value = 0;
  for (char c : frac) frac_value = frac_value * 10 + (c - '0');
  out += Rational(frac_value) / pow10(decimals);
  return negative ? Rational(-out) : out;
}

std::string format_decimal(const Rational& value, int max_fraction) {
  const bool negative = value < 0;
  const Rational magnitude = negative ? Rational(-value) : value;
  int decimals = max_fraction;
  if (magnitude != 0 && magnitude < 1) {
    // shift the budget past leading fractional zeros
    Rational probe = magnitude;
    while (probe < Rational(1, 10)) {
      probe *= 10;
      ++decimals;
    }
  }
  auto [int_part, frac] = split_rounded(magnitude, decimals);
  while (!frac.empty() && frac.back() == '0') frac.pop_back();
  std::string out = int_part.str();
  if (!frac.empty()) out += "." + frac;
  if (negative && out != "0") out.insert(0, "-");
  return out;
}

std::optional<std::string> format_exact_decimal(const Rational& value) {
  cpp_int den = boost::multiprecision::denominator(value);
  int decimals = 0;
  while (den % 10 == 0) {
    den /= 10;
    ++decimals;
  }
  while (den % 2 == 0) {
    den /= 2;
    ++decimals;
  }
  while (den % 5 == 0) {
    den /= 5;
    ++decimals;
  }
  if (den != 1) return std::nullopt;
  const bool negative = value < 0;
  auto [int_part, frac] = split_rounded(negative ? Rational(-value) : value, decimals);
  while (!frac.empty() && frac.back() == '0') frac.pop_back();
  std::string out = int_part.str();
  if (!frac.empty()) out += "." + frac;
  if (negative && out != "0") out.insert(0, "-");
  return out;
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

}  // namespace toolqa
