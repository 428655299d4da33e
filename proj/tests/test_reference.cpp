// Reference oracle: exact LP baseline, secant discretization, certificates.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "genflow/concave_solver.hpp"
#include "genflow/gen.hpp"
#include "genflow/linear_solver.hpp"
#include "genflow/reference.hpp"

using namespace genflow;

TEST_CASE("lp reference: two isolated nodes, weighted deficit", "[reference]") {
  Network net;
  net.add_node(Rational(1), 2);   // demand 1 at weight 2: unmet, costs 2
  net.add_node(Rational(-1), 1);  // supply 1: surplus is free
  auto res = lp_reference_linear(net);
  CHECK(res.kappa == Rational(2));
  REQUIRE(res.excesses.size() == 2);
  CHECK(res.excesses[0] == Rational(-1));
  CHECK(res.excesses[1] == Rational(1));
}

TEST_CASE("lp reference: one gainy arc can balance both nodes", "[reference]") {
  // Arc 1 -> 2 with gain 3/2, capacity 2.  Sending f in [2/3, 1] zeroes the
  // objective: node 1 has one unit spare, node 2 needs one unit.
  Network net;
  net.add_node(Rational(-1), 1);
  net.add_node(Rational(1), 1);
  net.add_arc(0, 1, Rational(0), Rational(2), GainSpec::linear(Rational(3, 2)));
  auto res = lp_reference_linear(net);
  CHECK(res.kappa == Rational(0));
  REQUIRE(res.flows.size() == 1);
  CHECK(res.flows[0] >= Rational(2, 3));
  CHECK(res.flows[0] <= Rational(1));
  for (const auto& e : res.excesses) CHECK(e >= 0);
}

TEST_CASE("lp reference rejects nonlinear and oversized input", "[reference]") {
  Network net;
  net.add_node(Rational(0));
  net.add_node(Rational(0));
  net.add_arc(0, 1, Rational(1), Rational(2), GainSpec::log(Rational(1)));
  CHECK_THROWS_AS(lp_reference_linear(net), input_error);

  Network big;
  for (int i = 0; i < 13; ++i) big.add_node(Rational(0));
  CHECK_THROWS_AS(lp_reference_linear(big), input_error);
}

TEST_CASE("lp reference matches the scaling solver on random instances",
          "[reference]") {
  for (unsigned long seed = 1; seed <= 25; ++seed) {
    CAPTURE(seed);
    Network net = gen_linear(seed);
    auto lp = lp_reference_linear(net);
    auto fp = solve_symmetric_linear(net);
    CHECK(lp.kappa == fp.kappa);
  }
}

TEST_CASE("secant discretization keeps linear instances intact", "[reference]") {
  Network net = gen_linear(7);
  auto disc = pwl_discretize(net, 16);
  CHECK_FALSE(disc.clipped);
  CHECK(disc.net.m() == net.m());
  CHECK(disc.gap < Rational(1, 1000000));
  auto lp_orig = lp_reference_linear(net);
  auto lp_disc = lp_reference_linear(disc.net);
  Rational diff = lp_orig.kappa - lp_disc.kappa;
  if (diff < 0) diff = -diff;
  CHECK(diff <= disc.gap);
}

TEST_CASE("secant discretization of a log arc", "[reference]") {
  // Arc with value c*ln(f) on [1, 2] normalizes to ln(f+1) on [0, 1].
  // One segment: slope = ln 2; the sandwich gap covers the concave bulge
  // (max deviation ~0.0589 at the midpoint, charged twice).
  Network net;
  net.add_node(Rational(0));
  net.add_node(Rational(0));
  net.add_arc(0, 1, Rational(1), Rational(2), GainSpec::log(Rational(1)));

  auto one = pwl_discretize(net, 1);
  CHECK_FALSE(one.clipped);
  REQUIRE(one.net.m() == 1);
  REQUIRE(one.net.arcs[0].gain.is_linear());
  double slope = to_real<double>(one.net.arcs[0].gain.gamma);
  CHECK_THAT(slope, Catch::Matchers::WithinAbs(std::log(2.0), 1e-12));
  CHECK(one.gap >= rational_from_double(0.11));
  CHECK(one.gap <= rational_from_double(0.2));

  auto fine = pwl_discretize(net, 64);
  CHECK(fine.net.m() == 64);
  CHECK(fine.gap * 100 < one.gap);
}

TEST_CASE("discretization flags gains that are immense at zero", "[reference]") {
  Network net;
  net.add_node(Rational(0));
  net.add_node(Rational(0));
  net.add_arc(0, 1, Rational(0), Rational(2), GainSpec::log(Rational(1)));
  auto disc = pwl_discretize(net, 4);
  CHECK(disc.clipped);
}

TEST_CASE("refining the discretization respects the sandwich", "[reference]") {
  // Both grids bracket the true optimum, and the 2k grid nests the k grid,
  // so kappa cannot rise by more than the combined gaps.
  for (unsigned long seed : {1UL, 2UL, 3UL, 5UL, 8UL, 13UL}) {
    CAPTURE(seed);
    Network net = gen_concave(seed);
    auto coarse = pwl_discretize(net, 8);
    auto fine = pwl_discretize(net, 16);
    REQUIRE_FALSE(coarse.clipped);
    REQUIRE_FALSE(fine.clipped);
    auto lp_c = lp_reference_linear(coarse.net);
    auto lp_f = lp_reference_linear(fine.net);
    CHECK(lp_f.kappa <= lp_c.kappa + coarse.gap + fine.gap);
  }
}

TEST_CASE("exact certificate accepts an optimal solve", "[reference]") {
  Network net;
  net.add_node(Rational(1), 2);
  net.add_node(Rational(-1), 1);
  auto res = solve_symmetric_linear(net);
  REQUIRE(res.kappa == Rational(2));
  auto rep = check_conservative_certificate(net, res.flows, res.labels);
  CHECK(rep.conservative);
  CHECK(rep.optimal);
  CHECK(rep.violations.empty());
}

TEST_CASE("exact certificate rejects tampered labels", "[reference]") {
  Network net;
  net.add_node(Rational(1), 2);
  net.add_node(Rational(-1), 1);
  auto res = solve_symmetric_linear(net);

  SECTION("deficit node unpinned") {
    auto labels = res.labels;
    labels[0] = Ext<Rational>(Rational(1));  // floor is 1/2
    auto rep = check_conservative_certificate(net, res.flows, labels);
    CHECK_FALSE(rep.conservative);
    CHECK_FALSE(rep.optimal);
    CHECK_FALSE(rep.violations.empty());
  }
  SECTION("label pushed below its floor") {
    auto labels = res.labels;
    labels[0] = Ext<Rational>(Rational(1, 4));  // below 1/M = 1/2
    auto rep = check_conservative_certificate(net, res.flows, labels);
    CHECK_FALSE(rep.conservative);
  }
}

TEST_CASE("exact certificate rejects tampered flows", "[reference]") {
  Network net;
  net.add_node(Rational(-1), 1);
  net.add_node(Rational(1), 1);
  net.add_arc(0, 1, Rational(0), Rational(2), GainSpec::linear(Rational(3, 2)));
  auto res = solve_symmetric_linear(net);
  REQUIRE(res.kappa == Rational(0));

  SECTION("flow beyond capacity") {
    auto flows = res.flows;
    flows[0] = Rational(3);
    auto rep = check_conservative_certificate(net, flows, res.labels);
    CHECK_FALSE(rep.conservative);
  }
  SECTION("flow withdrawn, leaving a deficit") {
    auto flows = res.flows;
    flows[0] = Rational(0);
    auto rep = check_conservative_certificate(net, flows, res.labels);
    CHECK_FALSE(rep.optimal);
  }
}

TEST_CASE("exact certificate holds across random linear solves", "[reference]") {
  for (unsigned long seed = 30; seed < 45; ++seed) {
    CAPTURE(seed);
    Network net = gen_linear(seed);
    auto res = solve_symmetric_linear(net);
    auto rep = check_conservative_certificate(net, res.flows, res.labels);
    CHECK(rep.conservative);
    CHECK(rep.optimal);
  }
}

TEST_CASE("float certificate accepts a concave solve", "[reference]") {
  Network net = gen_concave(4);
  auto res = solve_symmetric_concave<double>(net, 1e-9);
  std::vector<Ext<double>> labels;
  labels.reserve(res.labels.size());
  for (double l : res.labels) labels.emplace_back(l);
  auto rep = check_conservative_certificate(net, res.flows, labels, 1e-6);
  CHECK(rep.conservative);
  CHECK(rep.max_slack <= 1e-6);
}
