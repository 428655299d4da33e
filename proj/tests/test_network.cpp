// Network model and .cgf file I/O: parsing, diagnostics with line numbers,
// serialization round trips, and lower-bound normalization.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <sstream>

#include "genflow/gen.hpp"
#include "genflow/network.hpp"

using namespace genflow;
using Catch::Matchers::ContainsSubstring;

namespace {
Network parse(const std::string& text) {
  std::istringstream in(text);
  return read_network(in, "x.cgf");
}
std::string dump(const Network& net) {
  std::ostringstream os;
  write_network(os, net);
  return os.str();
}
}  // namespace

TEST_CASE("cgf files parse with 1-based ids", "[network]") {
  Network net = parse(
      "c comment line\n"
      "p cgf 2 1\n"
      "n 1 -1 2\n"
      "n 2 1 1\n"
      "a 1 2 0 2 lin 3/2\n");
  REQUIRE(net.n() == 2);
  REQUIRE(net.m() == 1);
  CHECK(net.b[0] == Rational(-1));
  CHECK(net.M[0] == 2);
  CHECK(net.arcs[0].tail == 0);
  CHECK(net.arcs[0].head == 1);
  CHECK(net.arcs[0].upper == Rational(2));
  CHECK(net.arcs[0].gain.gamma == Rational(3, 2));
}

TEST_CASE("cgf parses every gain family", "[network]") {
  Network net = parse(
      "p cgf 2 4\n"
      "n 1 0 1\n"
      "n 2 0 1\n"
      "a 1 2 0 2 lin 2\n"
      "a 1 2 1 3 log 1/2\n"
      "a 1 2 0 4 pow 2 1/2\n"
      "a 1 2 0 2 pwl 3 0 0 1 2 3 3\n");
  CHECK(net.arcs[0].gain.kind == GainKind::Linear);
  CHECK(net.arcs[1].gain.kind == GainKind::Log);
  CHECK(net.arcs[1].gain.c == Rational(1, 2));
  CHECK(net.arcs[2].gain.kind == GainKind::Pow);
  CHECK(net.arcs[2].gain.p == Rational(1, 2));
  CHECK(net.arcs[3].gain.kind == GainKind::Pwl);
  REQUIRE(net.arcs[3].gain.px.size() == 3);
  CHECK(net.arcs[3].gain.py[1] == Rational(2));
}

TEST_CASE("cgf errors carry file and line", "[network]") {
  CHECK_THROWS_WITH(parse("p cgf 1 0\nn 1 0 1\nq nonsense\n"),
                    ContainsSubstring("x.cgf:3"));
  CHECK_THROWS_WITH(parse("p cgf 2 1\nn 1 0 1\nn 2 0 1\na 1 5 0 1 lin 1\n"),
                    ContainsSubstring("x.cgf:4"));
  CHECK_THROWS_WITH(parse("p cgf 1 0\nn 1 0 1\nn 1 0 1\n"),
                    ContainsSubstring("x.cgf:3"));
  CHECK_THROWS_WITH(parse("p cgf 2 1\nn 1 0 1\nn 2 0 1\na 1 2 0 1 xyz 1\n"),
                    ContainsSubstring("x.cgf:4"));
  // Semantic errors surface at end-of-file validation, prefixed by the file.
  CHECK_THROWS_WITH(parse("p cgf 2 1\nn 1 0 1\nn 2 0 1\na 1 2 0 1 lin 0\n"),
                    ContainsSubstring("x.cgf"));
  CHECK_THROWS_WITH(parse("p cgf 2 1\nn 1 0 1\nn 2 0 1\na 1 2 3 1 lin 1\n"),
                    ContainsSubstring("x.cgf"));
  // Declared counts must match the body.
  CHECK_THROWS_AS(parse("p cgf 2 1\nn 1 0 1\nn 2 0 1\n"), input_error);
}

TEST_CASE("cgf write/read round-trips byte-for-byte", "[network]") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    Network a = seed % 2 ? gen_linear(seed) : gen_concave(seed);
    const std::string text = dump(a);
    std::istringstream in(text);
    Network b = read_network(in, "mem.cgf");
    CHECK(dump(b) == text);
  }
}

TEST_CASE("validation catches inconsistent instances", "[network]") {
  Network net;
  net.add_node(Rational(0), Integer(1));
  net.add_node(Rational(0), Integer(1));
  net.add_arc(0, 1, Rational(0), Rational(1), GainSpec::linear(Rational(1)));
  CHECK_NOTHROW(net.validate());
  Network bad = net;
  bad.arcs[0].lower = Rational(3);
  CHECK_THROWS_AS(bad.validate(), input_error);
  Network badw = net;
  badw.M[0] = Integer(0);
  CHECK_THROWS_AS(badw.validate(), input_error);
}

TEST_CASE("normalization shifts linear lower bounds into demands",
          "[network]") {
  Network net;
  net.add_node(Rational(0), Integer(1));
  net.add_node(Rational(0), Integer(1));
  net.add_arc(0, 1, Rational(1), Rational(3), GainSpec::linear(Rational(2)));
  Normalized nz = normalize(net);
  CHECK(nz.b_exact());
  CHECK(nz.net.arcs[0].lower == Rational(0));
  CHECK(nz.net.arcs[0].upper == Rational(2));
  // Tail must still ship the mandatory unit; head already booked its gain.
  CHECK(nz.net.b[0] == Rational(1));
  CHECK(nz.net.b[1] == Rational(-2));
  CHECK(nz.denormalize(std::vector<Rational>{Rational(1, 2)})[0] ==
        Rational(3, 2));
}

TEST_CASE("normalization folds smooth lower bounds symbolically",
          "[network]") {
  Network net;
  net.add_node(Rational(0), Integer(1));
  net.add_node(Rational(0), Integer(1));
  net.add_arc(0, 1, Rational(2), Rational(4), GainSpec::log(Rational(2)));
  Normalized nz = normalize(net);
  CHECK_FALSE(nz.b_exact());
  CHECK(nz.net.arcs[0].gain.shift == Rational(2));
  std::vector<double> d = nz.demands<double>();
  CHECK_THAT(d[0], Catch::Matchers::WithinAbs(2.0, 1e-15));
  CHECK_THAT(d[1], Catch::Matchers::WithinAbs(-2.0 * std::log(2.0), 1e-14));
}

TEST_CASE("normalization truncates capacity at a trailing flat segment",
          "[network]") {
  Network net;
  net.add_node(Rational(0), Integer(1));
  net.add_node(Rational(0), Integer(1));
  net.add_arc(0, 1, Rational(0), Rational(5),
              GainSpec::pwl({Rational(0), Rational(2), Rational(3)},
                            {Rational(0), Rational(2), Rational(2)}));
  Normalized nz = normalize(net);
  CHECK(nz.net.arcs[0].upper == Rational(2));
}
