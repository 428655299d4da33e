// Bounded-variable exact simplex (Bland's rule): the reference oracle's
// engine, tested on small hand-solvable programs.

#include <catch2/catch_amalgamated.hpp>

#include "genflow/simplex.hpp"

using namespace genflow;

namespace {
Ext<Rational> up(long v) { return Ext<Rational>(Rational(v)); }
}  // namespace

TEST_CASE("maximizes a single bounded variable", "[simplex]") {
  // min -x, x in [0, 1], constraint x + s = 1 (s slack in [0, 1]).
  BoundedSimplex lp;
  int x = lp.add_var(Rational(-1), Rational(0), up(1));
  int s = lp.add_var(Rational(0), Rational(0), up(1));
  int row = lp.add_constraint(Rational(1));
  lp.set_coeff(row, x, Rational(1));
  lp.set_coeff(row, s, Rational(1));
  auto res = lp.solve({s});
  REQUIRE(res.optimal);
  CHECK(res.objective == Rational(-1));
  CHECK(res.x[x] == Rational(1));
  CHECK(res.x[s] == Rational(0));
}

TEST_CASE("solves a two-variable vertex exactly", "[simplex]") {
  // max 3x + 2y  s.t.  x + y <= 4,  x + 3y <= 6,  x,y >= 0.
  // Optimum at (4, 0): objective 12 (slope favours x).
  BoundedSimplex lp;
  int x = lp.add_var(Rational(-3), Rational(0), Ext<Rational>::infinity());
  int y = lp.add_var(Rational(-2), Rational(0), Ext<Rational>::infinity());
  int s1 = lp.add_var(Rational(0), Rational(0), Ext<Rational>::infinity());
  int s2 = lp.add_var(Rational(0), Rational(0), Ext<Rational>::infinity());
  int r1 = lp.add_constraint(Rational(4));
  int r2 = lp.add_constraint(Rational(6));
  lp.set_coeff(r1, x, Rational(1));
  lp.set_coeff(r1, y, Rational(1));
  lp.set_coeff(r1, s1, Rational(1));
  lp.set_coeff(r2, x, Rational(1));
  lp.set_coeff(r2, y, Rational(3));
  lp.set_coeff(r2, s2, Rational(1));
  auto res = lp.solve({s1, s2});
  REQUIRE(res.optimal);
  CHECK(res.objective == Rational(-12));
  CHECK(res.x[x] == Rational(4));
  CHECK(res.x[y] == Rational(0));
}

TEST_CASE("fractional optimum stays exact", "[simplex]") {
  // max x + y  s.t.  2x + y <= 3,  x + 2y <= 3  ->  x = y = 1 at the corner;
  // scale rhs to 1: 2x + y <= 1, x + 2y <= 1  ->  x = y = 1/3, value 2/3.
  BoundedSimplex lp;
  int x = lp.add_var(Rational(-1), Rational(0), Ext<Rational>::infinity());
  int y = lp.add_var(Rational(-1), Rational(0), Ext<Rational>::infinity());
  int s1 = lp.add_var(Rational(0), Rational(0), Ext<Rational>::infinity());
  int s2 = lp.add_var(Rational(0), Rational(0), Ext<Rational>::infinity());
  int r1 = lp.add_constraint(Rational(1));
  int r2 = lp.add_constraint(Rational(1));
  lp.set_coeff(r1, x, Rational(2));
  lp.set_coeff(r1, y, Rational(1));
  lp.set_coeff(r1, s1, Rational(1));
  lp.set_coeff(r2, x, Rational(1));
  lp.set_coeff(r2, y, Rational(2));
  lp.set_coeff(r2, s2, Rational(1));
  auto res = lp.solve({s1, s2});
  REQUIRE(res.optimal);
  CHECK(res.objective == Rational(-2, 3));
  CHECK(res.x[x] == Rational(1, 3));
  CHECK(res.x[y] == Rational(1, 3));
}

TEST_CASE("detects an unbounded ray", "[simplex]") {
  // min -x with x free upward and a vacuous constraint on another variable.
  BoundedSimplex lp;
  int x = lp.add_var(Rational(-1), Rational(0), Ext<Rational>::infinity());
  int s = lp.add_var(Rational(0), Rational(0), Ext<Rational>::infinity());
  int row = lp.add_constraint(Rational(1));
  lp.set_coeff(row, s, Rational(1));
  (void)x;
  auto res = lp.solve({s});
  CHECK_FALSE(res.optimal);
}

TEST_CASE("honours nonzero lower bounds and finite uppers", "[simplex]") {
  // min x, x in [2, 5], x + s = 6, s in [0, 10]: optimum x = 2.
  BoundedSimplex lp;
  int x = lp.add_var(Rational(1), Rational(2), up(5));
  int s = lp.add_var(Rational(0), Rational(0), up(10));
  int row = lp.add_constraint(Rational(6));
  lp.set_coeff(row, x, Rational(1));
  lp.set_coeff(row, s, Rational(1));
  auto res = lp.solve({s});
  REQUIRE(res.optimal);
  CHECK(res.x[x] == Rational(2));
  CHECK(res.x[s] == Rational(4));
  CHECK(res.objective == Rational(2));
}

TEST_CASE("degenerate pivots terminate under Bland's rule", "[simplex]") {
  // A classic degenerate configuration: multiple identical corners.
  BoundedSimplex lp;
  int x = lp.add_var(Rational(-1), Rational(0), Ext<Rational>::infinity());
  int y = lp.add_var(Rational(-1), Rational(0), Ext<Rational>::infinity());
  int s1 = lp.add_var(Rational(0), Rational(0), Ext<Rational>::infinity());
  int s2 = lp.add_var(Rational(0), Rational(0), Ext<Rational>::infinity());
  int s3 = lp.add_var(Rational(0), Rational(0), Ext<Rational>::infinity());
  int r1 = lp.add_constraint(Rational(0));  // x - y <= 0
  int r2 = lp.add_constraint(Rational(0));  // y - x <= 0
  int r3 = lp.add_constraint(Rational(2));  // x + y <= 2
  lp.set_coeff(r1, x, Rational(1));
  lp.set_coeff(r1, y, Rational(-1));
  lp.set_coeff(r1, s1, Rational(1));
  lp.set_coeff(r2, x, Rational(-1));
  lp.set_coeff(r2, y, Rational(1));
  lp.set_coeff(r2, s2, Rational(1));
  lp.set_coeff(r3, x, Rational(1));
  lp.set_coeff(r3, y, Rational(1));
  lp.set_coeff(r3, s3, Rational(1));
  auto res = lp.solve({s1, s2, s3});
  REQUIRE(res.optimal);
  CHECK(res.objective == Rational(-2));
  CHECK(res.x[x] == Rational(1));
  CHECK(res.x[y] == Rational(1));
}
