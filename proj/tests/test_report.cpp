// JSON report assembly: envelope shape, determinism, lossless exact fields.

#include <catch2/catch_amalgamated.hpp>

#include "genflow/gen.hpp"
#include "genflow/report.hpp"

using namespace genflow;

TEST_CASE("envelope puts identity first and wall time outside", "[report]") {
  Json body;
  body["status"] = "solved";
  const Json env = report_envelope("solve-linear", "in.cgf", body, 12.5);

  CHECK(env["schema"] == 1);
  CHECK(env["report"]["command"] == "solve-linear");
  CHECK(env["report"]["input"] == "in.cgf");
  CHECK(env["report"]["status"] == "solved");
  CHECK(env["wall_time_ms"] == 12.5);
  CHECK_FALSE(env["report"].contains("wall_time_ms"));

  // Key order is part of the contract: schema, report (command, input, ...),
  // then wall time.  ordered_json dumps in insertion order.
  const std::string s = env.dump();
  CHECK(s.rfind("{\"schema\":1,\"report\":{\"command\":\"solve-linear\","
                "\"input\":\"in.cgf\",\"status\":",
                0) == 0);
  CHECK(s.find("\"wall_time_ms\"") > s.find("\"report\""));
}

TEST_CASE("comparable section is byte-identical across reruns", "[report]") {
  const Network net = gen_linear(7);
  const std::string a =
      report_envelope("solve-linear", "seed7", report_linear(solve_symmetric_linear(net)),
                      1.0)["report"]
          .dump();
  const std::string b =
      report_envelope("solve-linear", "seed7", report_linear(solve_symmetric_linear(net)),
                      999.0)["report"]
          .dump();
  CHECK(a == b);

  // The full envelopes differ only through the volatile wall time.
  const Json e1 = report_envelope("c", "i", Json::object(), 1.0);
  const Json e2 = report_envelope("c", "i", Json::object(), 2.0);
  CHECK(e1["report"] == e2["report"]);
  CHECK(e1.dump() != e2.dump());
}

TEST_CASE("report JSON survives a parse/dump round trip", "[report]") {
  const Network net = gen_linear(11);
  const Json env = report_envelope(
      "solve-linear", "seed11", report_linear(solve_symmetric_linear(net)), 3.25);
  const std::string once = env.dump(2);
  const std::string twice = Json::parse(once).dump(2);
  CHECK(once == twice);
}

TEST_CASE("exact quantities serialize losslessly", "[report]") {
  // Isolated deficit instance: kappa = 2, deficit label 1/2, and the
  // degree-zero surplus node carries the infinite-label sentinel.
  Network net;
  net.add_node(Rational(1), 2);
  net.add_node(Rational(-1), 1);
  const auto res = solve_symmetric_linear(net);
  const Json j = report_linear(res);

  CHECK(j["kappa"].is_string());
  CHECK(parse_rational(j["kappa"].get<std::string>()) == res.kappa);
  CHECK(j["labels"][0] == "1/2");
  CHECK(j["labels"][1] == "inf");
  for (size_t a = 0; a < res.flows.size(); ++a)
    CHECK(parse_rational(j["flows"][a].get<std::string>()) == res.flows[a]);

  // Phase iterations mirror the log.
  CHECK(j["phases"].get<long>() == res.phases);
  CHECK(j["phase_iterations"].size() == res.phase_log.size());
}

TEST_CASE("concave report uses plain numbers", "[report]") {
  const Network net = gen_concave(4);
  const auto res = solve_symmetric_concave<double>(net, 1e-6);
  const Json j = report_concave(res);
  CHECK(j["status"] == "solved");
  CHECK(j["kappa"].is_number());
  CHECK(j["labels"].size() == res.labels.size());
  for (const auto& l : j["labels"]) CHECK(l.is_number());
  CHECK(j["total_augmentations"].get<long>() == res.total_augmentations);
}

TEST_CASE("sink report carries the verdict and reduction facts", "[report]") {
  Network feas;
  int s = feas.add_node(Rational(-1));
  int t = feas.add_node(Rational(0));
  feas.add_arc(s, t, Rational(0), Rational(1), GainSpec::linear(Rational(2)));
  const Json jf = report_sink(solve_sink_linear(feas, t));
  CHECK(jf["status"] == "solved");
  CHECK(jf["e_t"] == "2");
  CHECK(parse_rational(jf["b_t_reduced"].get<std::string>()) ==
        Rational(3));

  Network inf;
  inf.add_node(Rational(1));
  int t2 = inf.add_node(Rational(0));
  const Json ji = report_sink(solve_sink_linear(inf, t2));
  CHECK(ji["status"] == "infeasible");
}

TEST_CASE("certificate verdict mapping", "[report]") {
  CertificateReport c;
  c.conservative = true;
  c.optimal = true;
  CHECK(json_certificate(c)["verdict"] == "pass");
  c.optimal = false;
  CHECK(json_certificate(c)["verdict"] == "suboptimal");
  c.conservative = false;
  CHECK(json_certificate(c)["verdict"] == "fail");
}

TEST_CASE("equilibrium report keys prices by good id", "[report]") {
  MarketInstance inst;
  inst.buyers.push_back({"alice", Integer(5), Integer(0)});
  inst.goods.push_back("apples");
  inst.pairs.push_back({0, 0, Integer(7), {}});
  const Equilibrium eq = recover_exact_adnb(inst);
  REQUIRE(eq.feasible);
  const Json j = report_equilibrium(inst, eq);
  CHECK(j["status"] == "solved");
  CHECK(j["exact"] == true);
  CHECK(j["prices"]["apples"] == "5");
  CHECK(j["utilities"]["alice"] == "7");
  REQUIRE(j["allocations"].size() == 1);
  CHECK(j["allocations"][0][0] == "alice");
  CHECK(j["allocations"][0][2] == "1");

  Equilibrium bad;
  bad.feasible = false;
  const Json jb = report_equilibrium(inst, bad);
  CHECK(jb["status"] == "infeasible");
  CHECK_FALSE(jb.contains("prices"));
}
