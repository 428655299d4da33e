// Exact-arithmetic helpers: parsing, formatting, integer rounding, scalar
// conversions, and the extended (+infinity) wrapper.

#include <catch2/catch_amalgamated.hpp>

#include "genflow/rational.hpp"

using namespace genflow;

TEST_CASE("rational parsing accepts p and p/q and canonicalizes", "[rational]") {
  CHECK(parse_rational("7") == Rational(7));
  CHECK(parse_rational("-3") == Rational(-3));
  CHECK(parse_rational("+2") == Rational(2));
  CHECK(parse_rational("3/4") == Rational(3, 4));
  CHECK(parse_rational("2/4") == Rational(1, 2));
  CHECK(parse_rational("-6/4") == Rational(-3, 2));
  CHECK(parse_rational("6/-4") == Rational(-3, 2));
  CHECK(parse_rational("0/5") == Rational(0));
  // Canonical form even when built from a non-reduced pair.
  CHECK(rational_to_string(parse_rational("10/15")) == "2/3");
}

TEST_CASE("rational parsing rejects malformed text", "[rational]") {
  for (const char* bad : {"", "x", "1.5", "1e3", "1/", "/2", "1/0", "1 2",
                          "--3", "3/4/5"}) {
    INFO("input: '" << bad << "'");
    CHECK_THROWS_AS(parse_rational(bad), input_error);
  }
  Rational q;
  CHECK_FALSE(try_parse_rational("1/0", q));
}

TEST_CASE("rational formatting round-trips", "[rational]") {
  for (const Rational& q :
       {Rational(0), Rational(5), Rational(-7, 3), Rational(22, 7)}) {
    CHECK(parse_rational(rational_to_string(q)) == q);
  }
  CHECK(rational_to_string(Rational(5)) == "5");
  CHECK(rational_to_string(Rational(-7, 3)) == "-7/3");
}

TEST_CASE("integer rounding helpers", "[rational]") {
  CHECK(int_pow(Integer(3), 4) == 81);
  CHECK(int_pow(Integer(10), 0) == 1);
  CHECK(floor_to_int(Rational(7, 2)) == 3);
  CHECK(floor_to_int(Rational(-7, 2)) == -4);
  CHECK(ceil_to_int(Rational(7, 2)) == 4);
  CHECK(ceil_to_int(Rational(-7, 2)) == -3);
  CHECK(ceil_to_int(Rational(6)) == 6);
  CHECK(lcm(Integer(4), Integer(6)) == 12);
}

TEST_CASE("rational_from_double is exact in binary", "[rational]") {
  CHECK(rational_from_double(0.5) == Rational(1, 2));
  CHECK(rational_from_double(-2.25) == Rational(-9, 4));
  // 0.1 is not exactly representable; the rational equals the double bitwise.
  Rational q = rational_from_double(0.1);
  CHECK(q != Rational(1, 10));
  CHECK(q.get_d() == 0.1);
  CHECK_THROWS(rational_from_double(std::numeric_limits<double>::infinity()));
}

TEST_CASE("scalar conversions", "[rational]") {
  CHECK(to_real<Rational>(Rational(2, 3)) == Rational(2, 3));
  CHECK_THAT(to_real<double>(Rational(1, 3)),
             Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-16));
  CHECK(to_real<double>(Integer(42)) == 42.0);
  CHECK(real_to_double(Rational(5, 2)) == 2.5);
  CHECK(real_to_double(1.25) == 1.25);
  STATIC_CHECK(real_traits<Rational>::exact);
  STATIC_CHECK_FALSE(real_traits<double>::exact);
  CHECK(real_traits<double>::is_finite(1.0));
  CHECK_FALSE(real_traits<double>::is_finite(
      std::numeric_limits<double>::infinity()));
}

TEST_CASE("double_to_string is shortest round-trip", "[rational]") {
  for (double x : {0.1, 1.0 / 3.0, 2.0, 1e-9, -123.456}) {
    CHECK(std::stod(double_to_string(x)) == x);
  }
}

TEST_CASE("extended scalar orders with infinity on top", "[rational]") {
  using E = Ext<Rational>;
  const E two{Rational(2)}, three{Rational(3)}, inf = E::infinity();
  CHECK(two < three);
  CHECK(three < inf);
  CHECK_FALSE(inf < inf);
  CHECK(inf == E::infinity());
  CHECK(inf >= three);
  CHECK(two == E{Rational(2)});
  CHECK(two.get() == Rational(2));
  CHECK(inf.is_inf());
  CHECK_THROWS_AS(inf.get(), invariant_error);
}
