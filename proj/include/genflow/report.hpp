// JSON solve reports.
//
// Every CLI run emits one JSON document per input:
//
//   {
//     "schema": 1,
//     "report": { ... the comparable section ... },
//     "wall_time_ms": 4.2
//   }
//
// The "report" object is a pure function of the input and flags — identical
// runs byte-identical — so tests and downstream tooling may diff it directly;
// wall time sits outside it.  Exact quantities serialize as "p/q" strings
// (lossless round-trip), floating quantities as JSON numbers (shortest
// round-trip form), infinite labels as "inf".

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "genflow/concave_solver.hpp"
#include "genflow/linear_solver.hpp"
#include "genflow/market.hpp"
#include "genflow/reference.hpp"
#include "genflow/sink.hpp"

namespace genflow {

using Json = nlohmann::ordered_json;

inline Json json_rational(const Rational& q) {
  return Json(rational_to_string(q));
}

inline Json json_rational_vec(const std::vector<Rational>& v) {
  Json a = Json::array();
  for (const auto& q : v) a.push_back(rational_to_string(q));
  return a;
}

template <class R>
inline Json json_real_vec(const std::vector<R>& v) {
  Json a = Json::array();
  for (const auto& x : v) {
    if constexpr (real_traits<R>::exact)
      a.push_back(rational_to_string(x));
    else
      a.push_back(real_to_double(x));
  }
  return a;
}

template <class R>
inline Json json_label_vec(const std::vector<Ext<R>>& v) {
  Json a = Json::array();
  for (const auto& l : v) {
    if (l.is_inf()) {
      a.push_back("inf");
    } else if constexpr (real_traits<R>::exact) {
      a.push_back(rational_to_string(l.get()));
    } else {
      a.push_back(real_to_double(l.get()));
    }
  }
  return a;
}

inline Json json_tolerances(const EngineOptions& eng) {
  Json t;
  t["tol"] = eng.tol;
  t["tol_theta"] = eng.tol_theta;
  t["check_level"] = eng.check_level;
  return t;
}

inline Json json_certificate(const CertificateReport& c) {
  Json j;
  j["verdict"] = c.optimal ? "pass" : (c.conservative ? "suboptimal" : "fail");
  j["conservative"] = c.conservative;
  j["optimal"] = c.optimal;
  j["max_slack"] = c.max_slack;
  j["violations"] = c.violations;
  return j;
}

inline Json report_linear(const LinearSolveResult& r) {
  Json j;
  j["status"] = "solved";
  j["kappa"] = json_rational(r.kappa);
  j["flows"] = json_rational_vec(r.flows);
  j["labels"] = json_label_vec(r.labels);
  j["excesses"] = json_rational_vec(r.excesses);
  j["phases"] = r.phases;
  j["total_augmentations"] = r.total_augmentations;
  Json per = Json::array();
  for (const auto& row : r.phase_log) per.push_back(row.augmentations);
  j["phase_iterations"] = per;
  return j;
}

template <class R>
inline Json report_concave(const ConcaveSolveResult<R>& r) {
  Json j;
  j["status"] = "solved";
  j["kappa"] = real_to_double(r.kappa);
  j["flows"] = json_real_vec(r.flows);
  j["labels"] = json_real_vec(r.labels);
  j["excesses"] = json_real_vec(r.excesses);
  j["phases"] = r.phases;
  j["total_augmentations"] = r.total_augmentations;
  Json per = Json::array();
  for (const auto& row : r.phase_log) per.push_back(row.augmentations);
  j["phase_iterations"] = per;
  return j;
}

template <class R>
inline Json report_sink(const SinkSolveResult<R>& r) {
  Json j;
  j["status"] = r.feasible ? "solved" : "infeasible";
  if constexpr (real_traits<R>::exact) {
    j["e_t"] = rational_to_string(r.e_t_user);
    j["net_inflow_t"] = rational_to_string(r.net_inflow_t);
    j["kappa_symmetric"] = rational_to_string(r.kappa_symmetric);
  } else {
    j["e_t"] = real_to_double(r.e_t_user);
    j["net_inflow_t"] = real_to_double(r.net_inflow_t);
    j["kappa_symmetric"] = real_to_double(r.kappa_symmetric);
  }
  j["flows"] = json_real_vec(r.flows);
  j["labels"] = json_label_vec(r.labels);
  j["excesses"] = json_real_vec(r.excesses);
  j["ustar"] = json_rational(r.ustar);
  j["penalty"] = r.penalty.get_str();
  j["b_t_reduced"] = json_rational(r.b_t_reduced);
  j["phases"] = r.phases;
  j["total_augmentations"] = r.total_augmentations;
  return j;
}

inline Json report_equilibrium(const MarketInstance& inst,
                               const Equilibrium& eq) {
  Json j;
  j["status"] = eq.feasible ? "solved" : "infeasible";
  j["exact"] = eq.exact;
  if (!eq.feasible) return j;
  if (eq.exact) {
    j["tier"] = eq.tier;
    j["denominator_cap"] = eq.denominator_cap.get_str();
  }
  Json prices;
  for (int g = 0; g < inst.ng(); ++g)
    prices[inst.goods[g]] =
        eq.exact ? Json(rational_to_string(eq.prices_exact[g]))
                 : Json(eq.prices[g]);
  j["prices"] = std::move(prices);
  Json alloc = Json::array();
  std::size_t k = 0;
  for (const auto& p : inst.pairs) {
    if (p.util == 0 && !p.gain) continue;  // not a built pair
    Json row = Json::array();
    row.push_back(inst.buyers[p.buyer].id);
    row.push_back(inst.goods[p.good]);
    row.push_back(eq.exact ? Json(rational_to_string(eq.alloc_exact[k]))
                           : Json(eq.alloc[k]));
    alloc.push_back(std::move(row));
    ++k;
  }
  j["allocations"] = std::move(alloc);
  Json z;
  for (int i = 0; i < inst.nb(); ++i)
    z[inst.buyers[i].id] = eq.exact ? Json(rational_to_string(eq.z_exact[i]))
                                    : Json(eq.z[i]);
  j["utilities"] = std::move(z);
  j["clearing_residual"] = eq.clearing_residual;
  j["kkt_residual"] = eq.kkt_residual;
  Json near = Json::array();
  for (int i : eq.near_infeasible) near.push_back(inst.buyers[i].id);
  j["near_infeasible"] = std::move(near);
  j["eps"] = json_rational(eq.eps_used);
  j["phases"] = eq.phases;
  j["total_augmentations"] = eq.total_augmentations;
  return j;
}

// The envelope.  `report` is the comparable section; wall time stays outside.
inline Json report_envelope(const std::string& command,
                            const std::string& input, const Json& report,
                            double wall_ms) {
  Json rep;
  rep["command"] = command;
  rep["input"] = input;
  for (const auto& item : report.items()) rep[item.key()] = item.value();
  Json j;
  j["schema"] = 1;
  j["report"] = std::move(rep);
  j["wall_time_ms"] = wall_ms;
  return j;
}

}  // namespace genflow
