// Gain families: evaluation, inversion, increment forms, derivatives, and
// structural validation.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "genflow/gain.hpp"

using namespace genflow;

TEST_CASE("linear gain evaluates and inverts exactly", "[gain]") {
  GainOracle<Rational> g(GainSpec::linear(Rational(3, 2)));
  CHECK(g.value(Rational(2)) == Rational(3));
  CHECK(g.inverse(Rational(3)) == Rational(2));
  CHECK(g.inverse_increment(Rational(5), Rational(3)) == Rational(2));
  CHECK(g.value_decrement(Rational(5), Rational(2)) == Rational(3));
  GainOracle<double> gd(GainSpec::linear(Rational(3, 2)));
  CHECK(gd.right_deriv(1.0) == 1.5);
}

TEST_CASE("log gain matches the closed form", "[gain]") {
  GainOracle<double> g(GainSpec::log(Rational(1)));
  CHECK(g.value(1.0) == 0.0);
  CHECK_THAT(g.value(std::exp(1.0)), Catch::Matchers::WithinAbs(1.0, 1e-14));
  CHECK_THAT(g.inverse(1.0),
             Catch::Matchers::WithinAbs(std::exp(1.0), 1e-13));
  CHECK(GainSpec::log(Rational(1)).immense());
  CHECK(g.value(0.0) == -std::numeric_limits<double>::infinity());
  // Residual identity behind backward arcs: walking back one unit of gain
  // from the zero level lands at flow e (since ln e = 1).
  CHECK_THAT(g.inverse(-(-1.0)),
             Catch::Matchers::WithinAbs(std::exp(1.0), 1e-13));
}

TEST_CASE("power gain matches the closed form", "[gain]") {
  GainOracle<double> g(GainSpec::pow(Rational(1), Rational(1, 2)));
  CHECK_THAT(g.value(4.0), Catch::Matchers::WithinAbs(2.0, 1e-14));
  CHECK_THAT(g.inverse(2.0), Catch::Matchers::WithinAbs(4.0, 1e-13));
  GainOracle<double> g23(GainSpec::pow(Rational(2), Rational(2, 3)));
  CHECK_THAT(g23.value(8.0), Catch::Matchers::WithinAbs(8.0, 1e-13));
}

TEST_CASE("piecewise-linear gain interpolates exactly", "[gain]") {
  // (0,0) -> (1,2) -> (3,3): slopes 2 then 1/2.
  GainSpec spec = GainSpec::pwl({Rational(0), Rational(1), Rational(3)},
                                {Rational(0), Rational(2), Rational(3)});
  REQUIRE(spec.validate().empty());
  GainOracle<Rational> g(spec);
  CHECK(g.value(Rational(2)) == Rational(5, 2));
  CHECK(g.inverse(Rational(5, 2)) == Rational(2));
  CHECK(g.value(Rational(1, 2)) == Rational(1));
  // Exact increments agree with point-evaluation differences everywhere.
  for (int fn = 0; fn <= 6; ++fn)
    for (int dn = 0; dn <= fn; ++dn) {
      const Rational f(fn, 2), d(dn, 2);
      CHECK(g.value_decrement(f, d) == g.value(f) - g.value(f - d));
      const Rational dy = g.value_decrement(f, d);
      if (dn > 0) CHECK(g.inverse_increment(f - d, dy) == d);
    }
  GainOracle<double> gd(spec);
  CHECK(gd.left_deriv(1.0) == 2.0);
  CHECK(gd.right_deriv(1.0) == 0.5);
}

TEST_CASE("increment forms avoid cancellation for smooth gains", "[gain]") {
  // At large flow and tiny increment, the naive difference of point values
  // loses half the mantissa; the increment forms stay fully accurate.
  GainOracle<double> g(GainSpec::log(Rational(1)));
  const double f = 1e8;
  const double dy = 1e-12;
  const double inc = g.inverse_increment(f, dy);
  CHECK_THAT(inc, Catch::Matchers::WithinRel(f * std::expm1(dy), 1e-12));
  const double dec = g.value_decrement(f, 1.0);
  CHECK_THAT(dec, Catch::Matchers::WithinRel(-std::log1p(-1.0 / f), 1e-12));

  GainOracle<double> p(GainSpec::pow(Rational(3), Rational(1, 2)));
  const double fp = 4e6;
  const double dyp = 1e-9;
  const double incp = p.inverse_increment(fp, dyp);
  // d(c sqrt(f)) = c/(2 sqrt f) df  =>  df = dy * 2 sqrt(f) / c.
  CHECK_THAT(incp,
             Catch::Matchers::WithinRel(dyp * 2.0 * std::sqrt(fp) / 3.0, 1e-9));
}

TEST_CASE("increment and decrement are mutually inverse", "[gain]") {
  // inverse_increment(f - dx, value_decrement(f, dx)) == dx: the round trip
  // behind matching forward and backward residual steps.
  const GainSpec specs[] = {
      GainSpec::linear(Rational(5, 3)),
      GainSpec::log(Rational(2)),
      GainSpec::pow(Rational(1), Rational(1, 2)),
      GainSpec::pow(Rational(2), Rational(2, 3)),
  };
  for (const GainSpec& s : specs) {
    GainOracle<double> g(s);
    for (double f : {0.5, 1.0, 3.0, 7.5}) {
      for (double dx : {1e-3, 0.25, f * 0.5}) {
        const double dy = g.value_decrement(f, dx);
        REQUIRE(std::isfinite(dy));
        CHECK_THAT(g.inverse_increment(f - dx, dy),
                   Catch::Matchers::WithinRel(dx, 1e-9));
      }
    }
  }
}

TEST_CASE("theta linearization denominator for the log family", "[gain]") {
  // Stepping one unit of gain-space image up from flow 1 of plain ln costs
  // e - 1 units of flow, so the step ratio is 1/(e-1).
  GainOracle<double> g(GainSpec::log(Rational(1)));
  const double den = g.inverse_increment(1.0, 1.0);
  CHECK_THAT(den, Catch::Matchers::WithinAbs(std::exp(1.0) - 1.0, 1e-13));
  CHECK_THAT(1.0 / den,
             Catch::Matchers::WithinAbs(1.0 / (std::exp(1.0) - 1.0), 1e-13));
}

TEST_CASE("gain validation rejects malformed specs", "[gain]") {
  CHECK_FALSE(GainSpec::linear(Rational(0)).validate().empty());
  CHECK_FALSE(GainSpec::linear(Rational(-1)).validate().empty());
  CHECK_FALSE(GainSpec::log(Rational(0)).validate().empty());
  CHECK_FALSE(GainSpec::pow(Rational(1), Rational(1)).validate().empty());
  CHECK_FALSE(GainSpec::pow(Rational(1), Rational(3, 2)).validate().empty());
  // Convex pwl (increasing slopes) is rejected.
  CHECK_FALSE(GainSpec::pwl({Rational(0), Rational(1), Rational(2)},
                            {Rational(0), Rational(1), Rational(3)})
                  .validate()
                  .empty());
  // Interior flat segment rejected; trailing flat allowed.
  CHECK_FALSE(GainSpec::pwl({Rational(0), Rational(1), Rational(2)},
                            {Rational(0), Rational(0), Rational(1)})
                  .validate()
                  .empty());
  GainSpec trailing = GainSpec::pwl({Rational(0), Rational(1), Rational(2)},
                                    {Rational(0), Rational(1), Rational(1)});
  CHECK(trailing.validate().empty());
  CHECK(trailing.strict_upper() == Rational(1));
  CHECK_FALSE(GainSpec::pwl({Rational(1), Rational(2)},
                            {Rational(0), Rational(1)})
                  .validate()
                  .empty());
}

TEST_CASE("sampled gain audit passes for the built-in families", "[gain]") {
  for (const GainSpec& s : {GainSpec::linear(Rational(2)),
                            GainSpec::log(Rational(1)),
                            GainSpec::pow(Rational(1), Rational(1, 2))}) {
    GainOracle<double> g(s);
    CHECK(validate_gain(g, 4.0, 200).empty());
  }
}
