#include "toolqa/error.hpp"
#include "toolqa/numeric.hpp"
#include "toolqa/strings.hpp"

#include <gtest/gtest.h>

namespace toolqa {
namespace {

TEST(PlainDecimal, AcceptsSignsAndFractions) {
  EXPECT_EQ(parse_plain_decimal("-12"), Rational(-12));
  EXPECT_EQ(parse_plain_decimal("0.74"), Rational(74, 100));
  EXPECT_EQ(parse_plain_decimal(".5"), Rational(1, 2));
  EXPECT_EQ(parse_plain_decimal("3."), Rational(3));
  EXPECT_FALSE(parse_plain_decimal(""));
  EXPECT_FALSE(parse_plain_decimal("1,000"));
  EXPECT_FALSE(parse_plain_decimal("1e3"));
  EXPECT_FALSE(parse_plain_decimal("."));
}

TEST(Rounding, HalvesAwayFromZero) {
  EXPECT_EQ(round_to_decimals(Rational(25, 1000), 2), Rational(3, 100));
  EXPECT_EQ(round_to_decimals(Rational(-25, 1000), 2), Rational(-3, 100));
  EXPECT_EQ(round_to_decimals(Rational(24, 1000), 2), Rational(2, 100));
  EXPECT_EQ(round_to_decimals(Rational(5, 2), 0), Rational(3));
}

TEST(Rounding, FractionsWithLeadingZeros) {
  EXPECT_EQ(round_to_decimals(Rational(490807, 10000), 2), Rational(4908, 100));
  EXPECT_EQ(round_to_decimals(Rational(105, 10000), 3), Rational(11, 1000));
  EXPECT_EQ(round_to_decimals(Rational(-1009, 1000), 2), Rational(-101, 100));
}

TEST(FormatDecimal, TrimsTrailingZeros) {
  EXPECT_EQ(format_decimal(Rational(5000)), "5000");
  EXPECT_EQ(format_decimal(Rational(-132, 100)), "-1.32");
  EXPECT_EQ(format_decimal(Rational(0)), "0");
  EXPECT_EQ(format_decimal(Rational(1, 2)), "0.5");
}

TEST(FormatDecimal, TenFractionDigitsAboveOne) {
  EXPECT_EQ(format_decimal(Rational(578806, 24500)), "23.6247346939");
  EXPECT_EQ(format_decimal(Rational(2, 3)), "0.6666666667");
  EXPECT_EQ(format_decimal(Rational(10, 3)), "3.3333333333");
}

TEST(FormatDecimal, SignificantDigitsBelowOne) {
  EXPECT_EQ(format_decimal(Rational(1, 30000)), "0.00003333333333");
  EXPECT_EQ(format_decimal(Rational(-1, 30000)), "-0.00003333333333");
}

TEST(FormatExactDecimal, OnlyTerminatingExpansions) {
  EXPECT_EQ(format_exact_decimal(Rational(1, 8)), "0.125");
  EXPECT_EQ(format_exact_decimal(Rational(-4000000)), "-4000000");
  EXPECT_FALSE(format_exact_decimal(Rational(1, 3)));
}

TEST(Strings, TrimFoldJoin) {
  EXPECT_EQ(strings::trim("  a b \n"), "a b");
  EXPECT_EQ(strings::to_lower("Glenferrie OVAL"), "glenferrie oval");
  EXPECT_TRUE(strings::iequals("Script", "sCRIPT"));
  EXPECT_EQ(strings::join({"164", "142"}, ", "), "164, 142");
  EXPECT_EQ(strings::collapse_spaces("  a \t b  "), "a b");
}

TEST(Strings, Utf8Handling) {
  EXPECT_EQ(strings::utf8_length("\xE2\x82\xAC" "5"), 2u);
  EXPECT_TRUE(strings::is_valid_utf8("caf\xC3\xA9"));
  EXPECT_FALSE(strings::is_valid_utf8("caf\xE9"));
  EXPECT_EQ(strings::latin1_to_utf8("caf\xE9"), "caf\xC3\xA9");
}

TEST(ErrorKinds, RoundTripThroughNames) {
  for (int k = 0; k <= static_cast<int>(ErrorKind::LengthMismatch); ++k) {
    const auto kind = static_cast<ErrorKind>(k);
    EXPECT_EQ(error_kind_from_string(to_string(kind)), kind);
  }
  EXPECT_THROW(error_kind_from_string("Nope"), std::invalid_argument);
}

TEST(ErrorKinds, MessageCarriesKindAndStage) {
  const Error e(ErrorKind::DivisionByZero, "division by zero", "calc");
  EXPECT_STREQ(e.what(), "DivisionByZero (calc): division by zero");
  EXPECT_EQ(e.with_stage("execute").stage(), "execute");
}

}  // namespace
}  // namespace toolqa
