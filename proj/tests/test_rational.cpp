#include <catch_amalgamated.hpp>

#include <cstdint>
#include <limits>

#include "bellpost/rational.hpp"

using bellpost::Rational;

TEST_CASE("rational normalizes sign and common factors") {
  const Rational r(6, -4);
  CHECK(r.num() == -3);
  CHECK(r.den() == 2);
  CHECK(r.str() == "-3/2");
  CHECK(Rational(0, 5).str() == "0");
  CHECK_THROWS_AS(Rational(1, 0), bellpost::InvalidArgument);
}

TEST_CASE("rational arithmetic is exact") {
  const Rational a(1, 3), b(1, 6);
  CHECK(a + b == Rational(1, 2));
  CHECK(a - b == Rational(1, 6));
  CHECK(a * b == Rational(1, 18));
  CHECK(a / b == Rational(2));
  CHECK(a > b);
  CHECK(Rational(-1, 2) < Rational(0));
  Rational acc;
  for (int i = 0; i < 6; ++i) acc += b;
  CHECK(acc == Rational(1));
}

TEST_CASE("rational recovers small fractions from doubles") {
  CHECK(Rational::from_double(0.25) == Rational(1, 4));
  CHECK(Rational::from_double(-2.0) == Rational(-2));
  CHECK(Rational::from_double(1.0 / 3.0) == Rational(1, 3));
  CHECK_THROWS_AS(Rational::from_double(std::numeric_limits<double>::quiet_NaN()), bellpost::InvalidArgument);
  CHECK_THROWS_AS(Rational::from_double(3.14159265358979, 100), bellpost::InvalidArgument);
}

TEST_CASE("rational overflow is reported") {
  const Rational big(std::numeric_limits<std::int64_t>::max() / 2);
  CHECK_THROWS_AS(big * Rational(4), bellpost::InvalidArgument);
}
