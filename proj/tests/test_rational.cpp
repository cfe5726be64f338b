#include <catch2/catch_amalgamated.hpp>

#include "bnblab/instances.hpp"
#include "bnblab/rational.hpp"

using namespace bnblab;

TEST_CASE("rational parsing and printing") {
  CHECK(parse_rational("0.3") == Rational(3, 10));
  CHECK(parse_rational("-0.35") == Rational(-35, 100));
  CHECK(parse_rational("16.7") == Rational(167, 10));
  CHECK(parse_rational("3/10") == Rational(3, 10));
  CHECK(parse_rational("-7/2") == Rational(-7, 2));
  CHECK(parse_rational("42") == Rational(42));
  CHECK(parse_rational("0") == 0);
  CHECK(parse_rational(".5") == Rational(1, 2));
  CHECK(parse_rational("2.") == Rational(2));

  CHECK(to_string(Rational(3, 10)) == "3/10");
  CHECK(to_string(Rational(-6, 4)) == "-3/2");
  CHECK(to_string(Rational(8)) == "8");

  CHECK_FALSE(try_parse_rational("").has_value());
  CHECK_FALSE(try_parse_rational("1/0").has_value());
  CHECK_FALSE(try_parse_rational("1.2/3").has_value());
  CHECK_FALSE(try_parse_rational("abc").has_value());
  CHECK_FALSE(try_parse_rational("1//2").has_value());
  CHECK_FALSE(try_parse_rational("-").has_value());
}

TEST_CASE("rational round trips through text") {
  SplitMix64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const int64_t num = static_cast<int64_t>(rng.next() % 20001) - 10000;
    const int64_t den = 1 + static_cast<int64_t>(rng.next() % 9999);
    const Rational q(num, den);
    CHECK(parse_rational(to_string(q)) == q);
  }
}

TEST_CASE("rational arithmetic is exact") {
  // (a+b)-b == a and (a*b)/b == a for random rationals.
  SplitMix64 rng(99);
  for (int i = 0; i < 500; ++i) {
    const Rational a(static_cast<int64_t>(rng.next() % 4001) - 2000,
                     1 + static_cast<int64_t>(rng.next() % 997));
    Rational b(static_cast<int64_t>(rng.next() % 4001) - 2000,
               1 + static_cast<int64_t>(rng.next() % 997));
    if (b == 0) b = Rational(1, 3);
    CHECK((a + b) - b == a);
    CHECK((a * b) / b == a);
  }
  // The motivating case for exactness: 0.1 + 0.2 == 0.3 holds for rationals.
  CHECK(parse_rational("0.1") + parse_rational("0.2") == parse_rational("0.3"));
}

TEST_CASE("floor, ceil, fractional part") {
  CHECK(floor_rational(Rational(9, 10)) == 0);
  CHECK(floor_rational(Rational(-1, 2)) == -1);
  CHECK(ceil_rational(Rational(9, 10)) == 1);
  CHECK(ceil_rational(Rational(-1, 2)) == 0);
  CHECK(floor_rational(Rational(3)) == 3);
  CHECK(ceil_rational(Rational(3)) == 3);
  CHECK(fractional_part(Rational(9, 10)) == Rational(9, 10));
  CHECK(fractional_part(Rational(-1, 4)) == Rational(3, 4));
  CHECK(fractional_part(Rational(5)) == 0);
  CHECK(is_integer(Rational(4, 2)));
  CHECK_FALSE(is_integer(Rational(1, 2)));
}
