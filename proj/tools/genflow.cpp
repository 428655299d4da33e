// genflow — command-line front end for the generalized-flow solvers.
//
// Subcommands:
//   solve-linear  <files...> [--certificate]
//   solve-concave <files...> --eps E [--trace FILE]
//   solve-sink    <files...> --sink NODE [--eps E] [--ustar R]
//   fisher        <files...> --eps E [--ustar R]
//   adnb          <files...> (--exact | --eps E)
//   verify        <files...> --against {lp|pwl} [--segments K] [--eps E]
//   gen           --family {linear|concave|adnb|adnb-infeasible}
//                 [--seed S] [--count N] [--out-dir D]
//
// Each input file yields one JSON report on stdout (input order preserved,
// also under --jobs).  Exit status: 0 success, 1 infeasible verdict, 2 input
// error, 3 internal-invariant failure; with several files the worst wins.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "genflow/gen.hpp"
#include "genflow/market.hpp"
#include "genflow/market_io.hpp"
#include "genflow/reference.hpp"
#include "genflow/report.hpp"
#include "genflow/sink.hpp"

namespace gf = genflow;
using gf::Json;

namespace {

gf::Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gf::input_error(path + ": cannot open file");
  return gf::read_network(in, path);
}

gf::MarketInstance load_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gf::input_error(path + ": cannot open file");
  return gf::read_market(in, path);
}

// What one worker hands back: the comparable report plus the file's verdict.
struct WorkResult {
  Json report;
  int code = 0;
};

struct Outcome {
  int code = 0;
  std::string out, err;
};

Outcome run_guarded(const std::string& command, const std::string& path,
                    const std::function<WorkResult()>& work) {
  Outcome o;
  try {
    const auto t0 = std::chrono::steady_clock::now();
    WorkResult w = work();
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    o.out = gf::report_envelope(command, path, w.report, ms).dump(2) + "\n";
    o.code = w.code;
  } catch (const gf::input_error& e) {
    o.err = std::string("genflow: ") + e.what() + "\n";
    o.code = 2;
  } catch (const gf::invariant_error& e) {
    o.err = std::string("genflow: internal invariant violated: ") + e.what() +
            "\n";
    o.code = 3;
  } catch (const std::exception& e) {
    o.err = std::string("genflow: ") + e.what() + "\n";
    o.code = 3;
  }
  return o;
}

// Run `work(file)` over all files, at most `jobs` at a time; results keep
// input order.  Solvers are pure functions, so workers share nothing.
template <class F>
std::vector<Outcome> for_each_file(const std::vector<std::string>& files,
                                   int jobs, F&& work) {
  std::vector<Outcome> res(files.size());
  if (jobs <= 1 || files.size() <= 1) {
    for (std::size_t i = 0; i < files.size(); ++i) res[i] = work(files[i]);
    return res;
  }
  std::atomic<std::size_t> next{0};
  const std::size_t nt =
      std::min<std::size_t>(static_cast<std::size_t>(jobs), files.size());
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (std::size_t t = 0; t < nt; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < files.size();)
        res[i] = work(files[i]);
    });
  for (auto& th : pool) th.join();
  return res;
}

int flush_outcomes(const std::vector<Outcome>& outcomes) {
  int worst = 0;
  for (const Outcome& o : outcomes) {
    std::cout << o.out;
    std::cerr << o.err;
    worst = std::max(worst, o.code);
  }
  std::cout.flush();
  return worst;
}

Json tolerances_exact() {
  Json t;
  t["arithmetic"] = "exact-rational";
  return t;
}

Json tolerances_double(const gf::EngineOptions& eng, double eps) {
  Json t;
  t["arithmetic"] = "double";
  t["eps"] = eps;
  t["tol"] = eng.tol;
  t["tol_theta"] = eng.tol_theta;
  t["check_level"] = eng.check_level;
  return t;
}

// The exact sink path needs linear gains and integer bounds/demands (the
// sink's own demand is replaced by the reduction, so it may stay rational).
bool exact_sink_capable(const gf::Network& net, int t) {
  if (!net.all_linear()) return false;
  for (const gf::Arc& a : net.arcs)
    if (a.lower.get_den() != 1 || a.upper.get_den() != 1) return false;
  for (int i = 0; i < net.n(); ++i)
    if (i != t && net.b[i].get_den() != 1) return false;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"generalized-flow solver: scaling fat-path algorithms with "
               "exact and floating-point back ends"};
  app.require_subcommand(1);
  int jobs = 1;
  app.add_option("--jobs", jobs, "number of input files solved in parallel")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  // ---- solve-linear ----
  auto* sl = app.add_subcommand(
      "solve-linear",
      "exact minimum-discrepancy solve (linear gains, integer data)");
  std::vector<std::string> sl_files;
  bool sl_cert = false;
  sl->add_option("files", sl_files, "network files (.cgf)")
      ->required()
      ->expected(-1);
  sl->add_flag("--certificate", sl_cert,
               "verify the optimality certificate and embed the verdict");

  // ---- solve-concave ----
  auto* sc = app.add_subcommand(
      "solve-concave",
      "floating-point minimum-discrepancy solve for concave gains");
  std::vector<std::string> sc_files;
  double sc_eps = 0;
  std::string sc_trace;
  sc->add_option("files", sc_files, "network files (.cgf)")
      ->required()
      ->expected(-1);
  sc->add_option("--eps", sc_eps, "additive objective tolerance")
      ->required()
      ->check(CLI::PositiveNumber);
  sc->add_option("--trace", sc_trace,
                 "write a per-phase CSV trace (single input file only)");

  // ---- solve-sink ----
  auto* ss = app.add_subcommand(
      "solve-sink", "maximize excess at one sink node; exact when the "
                    "instance is all-linear with integer data");
  std::vector<std::string> ss_files;
  int ss_sink = 0;
  double ss_eps = 1e-6;
  std::string ss_ustar;
  ss->add_option("files", ss_files, "network files (.cgf)")
      ->required()
      ->expected(-1);
  ss->add_option("--sink", ss_sink, "sink node id (1-based, as in the file)")
      ->required();
  ss->add_option("--eps", ss_eps,
                 "tolerance for the floating-point path (ignored by the "
                 "exact path)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ss->add_option("--ustar", ss_ustar,
                 "net-inflow bound at the sink, as integer or p/q "
                 "(required when an arc into the sink has -inf gain at its "
                 "lower capacity)");

  // ---- fisher ----
  auto* fi = app.add_subcommand(
      "fisher", "Fisher market equilibrium (linear or gain-curve utilities)");
  std::vector<std::string> fi_files;
  double fi_eps = 0;
  std::string fi_ustar;
  fi->add_option("files", fi_files, "market files (.json)")
      ->required()
      ->expected(-1);
  fi->add_option("--eps", fi_eps, "tolerance for the sink solve")
      ->required()
      ->check(CLI::PositiveNumber);
  fi->add_option("--ustar", fi_ustar,
                 "net-inflow bound override, as integer or p/q (required "
                 "for gain-curve utilities)");

  // ---- adnb ----
  auto* ad = app.add_subcommand(
      "adnb", "Nash-bargaining market with disagreement utilities");
  std::vector<std::string> ad_files;
  bool ad_exact = false;
  double ad_eps = 0;
  ad->add_option("files", ad_files, "market files (.json)")
      ->required()
      ->expected(-1);
  ad->add_flag("--exact", ad_exact,
               "recover the exact rational equilibrium (or a certified "
               "Infeasible verdict)");
  ad->add_option("--eps", ad_eps,
                 "tolerance for the floating-point path (unused with "
                 "--exact)")
      ->check(CLI::PositiveNumber);

  // ---- verify ----
  auto* ve = app.add_subcommand(
      "verify", "re-solve and check against an independent reference");
  std::vector<std::string> ve_files;
  std::string ve_against;
  int ve_segments = 64;
  double ve_eps = 1e-6;
  ve->add_option("files", ve_files, "network files (.cgf)")
      ->required()
      ->expected(-1);
  ve->add_option("--against", ve_against, "reference oracle: lp or pwl")
      ->required()
      ->check(CLI::IsMember({"lp", "pwl"}));
  ve->add_option("--segments", ve_segments,
                 "secant segments per nonlinear gain (pwl mode)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ve->add_option("--eps", ve_eps, "solver tolerance used in pwl mode")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  // ---- gen ----
  auto* ge = app.add_subcommand("gen", "write seeded random instances");
  std::string ge_family, ge_outdir = ".";
  std::uint64_t ge_seed = 1;
  int ge_count = 1;
  ge->add_option("--family", ge_family, "instance family")
      ->required()
      ->check(CLI::IsMember({"linear", "concave", "adnb", "adnb-infeasible"}));
  ge->add_option("--seed", ge_seed, "first seed")->capture_default_str();
  ge->add_option("--count", ge_count, "number of instances (seeds S..S+N-1)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ge->add_option("--out-dir", ge_outdir, "output directory")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (sl->parsed()) {
      auto res = for_each_file(sl_files, jobs, [&](const std::string& f) {
        return run_guarded("solve-linear", f, [&]() -> WorkResult {
          const gf::Network net = load_network(f);
          const gf::LinearSolveResult r = gf::solve_symmetric_linear(net);
          Json rep = gf::report_linear(r);
          rep["tolerances"] = tolerances_exact();
          int code = 0;
          if (sl_cert) {
            const gf::CertificateReport c =
                gf::check_conservative_certificate(net, r.flows, r.labels);
            rep["certificate"] = gf::json_certificate(c);
            if (!c.optimal) code = 3;
          }
          return {std::move(rep), code};
        });
      });
      return flush_outcomes(res);
    }

    if (sc->parsed()) {
      if (!sc_trace.empty() && sc_files.size() != 1)
        throw gf::input_error("--trace requires exactly one input file");
      auto res = for_each_file(sc_files, jobs, [&](const std::string& f) {
        return run_guarded("solve-concave", f, [&]() -> WorkResult {
          const gf::Network net = load_network(f);
          const gf::EngineOptions eng;
          const gf::ConcaveSolveResult<double> r =
              gf::solve_symmetric_concave<double>(net, sc_eps, eng);
          if (!sc_trace.empty()) {
            std::ofstream tr(sc_trace);
            if (!tr)
              throw gf::input_error(sc_trace + ": cannot open trace file");
            tr << "phase,delta,ex_start,kappa_end,augmentations\n";
            for (std::size_t p = 0; p < r.phase_log.size(); ++p) {
              const auto& row = r.phase_log[p];
              tr << (p + 1) << "," << row.delta << "," << row.ex_start << ","
                 << row.kappa_end << "," << row.augmentations << "\n";
            }
          }
          Json rep = gf::report_concave(r);
          rep["tolerances"] = tolerances_double(eng, sc_eps);
          return {std::move(rep), 0};
        });
      });
      return flush_outcomes(res);
    }

    if (ss->parsed()) {
      auto res = for_each_file(ss_files, jobs, [&](const std::string& f) {
        return run_guarded("solve-sink", f, [&]() -> WorkResult {
          const gf::Network net = load_network(f);
          if (ss_sink < 1 || ss_sink > net.n())
            throw gf::input_error(f + ": --sink must name a node between 1 and " +
                                  std::to_string(net.n()));
          const int t = ss_sink - 1;
          gf::SinkOptions opts;
          if (!ss_ustar.empty())
            opts.ustar = gf::parse_rational(ss_ustar, "--ustar");
          Json rep;
          int code = 0;
          if (exact_sink_capable(net, t)) {
            const auto r = gf::solve_sink_linear(net, t, opts);
            rep = gf::report_sink(r);
            rep["tolerances"] = tolerances_exact();
            code = r.feasible ? 0 : 1;
          } else {
            const auto r = gf::solve_sink_concave<double>(
                net, t, gf::rational_from_double(ss_eps), opts);
            rep = gf::report_sink(r);
            rep["tolerances"] = tolerances_double(opts.engine, ss_eps);
            code = r.feasible ? 0 : 1;
          }
          rep["sink"] = ss_sink;
          return {std::move(rep), code};
        });
      });
      return flush_outcomes(res);
    }

    if (fi->parsed()) {
      auto res = for_each_file(fi_files, jobs, [&](const std::string& f) {
        return run_guarded("fisher", f, [&]() -> WorkResult {
          const gf::MarketInstance inst = load_market(f);
          inst.validate();
          if (inst.discrimination() && fi_ustar.empty())
            throw gf::input_error(
                f + ": gain-curve utilities need an explicit --ustar bound");
          gf::SinkOptions opts;
          opts.ustar = fi_ustar.empty()
                           ? gf::Rational(inst.t_bound())
                           : gf::parse_rational(fi_ustar, "--ustar");
          const gf::MarketGraph g = gf::build_fisher(inst);
          const gf::Rational eps_q = gf::rational_from_double(fi_eps);
          const auto r =
              gf::solve_sink_concave<double>(g.net, g.t, eps_q, opts);
          const gf::Equilibrium eq =
              gf::extract_equilibrium(inst, g, r, eps_q);
          Json rep = gf::report_equilibrium(inst, eq);
          rep["tolerances"] = tolerances_double(opts.engine, fi_eps);
          return {std::move(rep), eq.feasible ? 0 : 1};
        });
      });
      return flush_outcomes(res);
    }

    if (ad->parsed()) {
      if (!ad_exact && !(ad_eps > 0))
        throw gf::input_error("adnb needs --eps unless --exact is given");
      auto res = for_each_file(ad_files, jobs, [&](const std::string& f) {
        return run_guarded("adnb", f, [&]() -> WorkResult {
          const gf::MarketInstance inst = load_market(f);
          inst.validate();
          Json rep;
          int code = 0;
          if (ad_exact) {
            const gf::Equilibrium eq = gf::recover_exact_adnb(inst);
            rep = gf::report_equilibrium(inst, eq);
            rep["tolerances"] = tolerances_exact();
            code = eq.feasible ? 0 : 1;
          } else {
            gf::SinkOptions opts;
            opts.ustar = gf::Rational(inst.t_bound());
            const gf::MarketGraph g = gf::build_adnb(inst);
            const gf::Rational eps_q = gf::rational_from_double(ad_eps);
            const auto r =
                gf::solve_sink_concave<double>(g.net, g.t, eps_q, opts);
            const gf::Equilibrium eq =
                gf::extract_equilibrium(inst, g, r, eps_q);
            rep = gf::report_equilibrium(inst, eq);
            rep["tolerances"] = tolerances_double(opts.engine, ad_eps);
            code = eq.feasible ? 0 : 1;
          }
          return {std::move(rep), code};
        });
      });
      return flush_outcomes(res);
    }

    if (ve->parsed()) {
      auto res = for_each_file(ve_files, jobs, [&](const std::string& f) {
        return run_guarded("verify", f, [&]() -> WorkResult {
          const gf::Network net = load_network(f);
          Json rep;
          rep["against"] = ve_against;
          int code = 0;
          if (ve_against == "lp") {
            const gf::LinearSolveResult r = gf::solve_symmetric_linear(net);
            const gf::LpReferenceResult ref = gf::lp_reference_linear(net);
            const bool match = r.kappa == ref.kappa;
            rep["kappa"] = gf::json_rational(r.kappa);
            rep["reference_kappa"] = gf::json_rational(ref.kappa);
            rep["verdict"] = match ? "match" : "mismatch";
            code = match ? 0 : 3;
          } else {
            const gf::EngineOptions eng;
            const gf::ConcaveSolveResult<double> r =
                gf::solve_symmetric_concave<double>(net, ve_eps, eng);
            const gf::DiscretizeResult disc =
                gf::pwl_discretize(net, ve_segments);
            if (disc.clipped)
              throw gf::input_error(
                  f + ": an arc has -inf gain at zero; the secant reference "
                      "is not sound for this instance");
            const gf::LpReferenceResult ref =
                gf::lp_reference_linear(disc.net);
            const double ref_kappa =
                gf::real_to_double(gf::to_real<double>(ref.kappa));
            const double gap =
                gf::real_to_double(gf::to_real<double>(disc.gap));
            const double bound = ve_eps + gap;
            const double diff = std::abs(r.kappa - ref_kappa);
            const bool match = diff <= bound;
            rep["segments"] = ve_segments;
            rep["kappa"] = r.kappa;
            rep["reference_kappa"] = gf::json_rational(ref.kappa);
            rep["secant_gap"] = gap;
            rep["allowed_difference"] = bound;
            rep["difference"] = diff;
            rep["verdict"] = match ? "match" : "mismatch";
            rep["tolerances"] = tolerances_double(eng, ve_eps);
            code = match ? 0 : 3;
          }
          return {std::move(rep), code};
        });
      });
      return flush_outcomes(res);
    }

    if (ge->parsed()) {
      std::filesystem::create_directories(ge_outdir);
      Json files = Json::array();
      for (int k = 0; k < ge_count; ++k) {
        const std::uint64_t seed = ge_seed + static_cast<std::uint64_t>(k);
        std::filesystem::path out(ge_outdir);
        if (ge_family == "linear" || ge_family == "concave") {
          const gf::Network net = ge_family == "linear"
                                      ? gf::gen_linear(seed)
                                      : gf::gen_concave(seed);
          out /= (ge_family == "linear" ? "lin_" : "con_") +
                 std::to_string(seed) + ".cgf";
          std::ofstream os(out);
          if (!os)
            throw gf::input_error(out.string() + ": cannot open for writing");
          gf::write_network(os, net);
        } else {
          const gf::MarketInstance inst =
              gf::gen_adnb(seed, ge_family == "adnb-infeasible");
          out /= (ge_family == "adnb" ? "adnb_" : "adnbinf_") +
                 std::to_string(seed) + ".json";
          std::ofstream os(out);
          if (!os)
            throw gf::input_error(out.string() + ": cannot open for writing");
          gf::write_market(os, inst);
        }
        files.push_back(out.string());
      }
      Json rep;
      rep["family"] = ge_family;
      rep["first_seed"] = ge_seed;
      rep["count"] = ge_count;
      rep["files"] = std::move(files);
      std::cout << gf::report_envelope("gen", ge_outdir, rep, 0.0).dump(2)
                << "\n";
      return 0;
    }
  } catch (const gf::input_error& e) {
    std::cerr << "genflow: " << e.what() << "\n";
    return 2;
  } catch (const gf::invariant_error& e) {
    std::cerr << "genflow: internal invariant violated: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "genflow: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
