// SPDX-License-Identifier: MIT
//
// Reference oracle: slow, independent certification of solver output.
//
//  * lp_reference_linear — exact LP optimum of the symmetric objective on an
//    all-linear instance (bounded-variable simplex over rationals).
//  * pwl_discretize — replaces each nonlinear gain by k secant segments
//    (parallel linear arcs), returning the discretized instance plus a sound
//    bound on how far its optimum can sit from the true one.
//  * check_conservative_certificate — verifies a (flow, labels) pair against
//    the optimality conditions, exactly for rational data or with a slack
//    tolerance for floating-point solutions.
//
// These paths favour transparency over speed; instances are capped at desk
// scale (node count) so the simplex stays trivially fast.

#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "genflow/flow.hpp"
#include "genflow/network.hpp"
#include "genflow/simplex.hpp"

namespace genflow {

// --------------------------------------------------------------------------
// Exact LP reference for linear instances.
//
// minimize Σ M_i κ_i  s.t.  Σ_in γ_a f_a − Σ_out f_a + κ_i − s_i = b_i,
//                           0 ≤ f ≤ u,  κ, s ≥ 0.
// At the optimum κ_i = max{−e_i, 0}, so the objective equals the symmetric
// objective κ(f).
// --------------------------------------------------------------------------

struct LpReferenceResult {
  Rational kappa;
  std::vector<Rational> flows;     // on the original arcs
  std::vector<Rational> excesses;  // per node, for the original instance
};

inline LpReferenceResult lp_reference_linear(const Network& net) {
  if (!net.all_linear())
    throw input_error("lp_reference_linear requires all-linear gains");
  if (net.n() > 12)
    throw input_error(
        "lp_reference_linear is limited to desk-scale instances (n <= 12)");
  if (net.m() > 2000)
    throw input_error("lp_reference_linear is limited to m <= 2000 arcs");

  Normalized norm = normalize(net);
  const Network& nn = norm.net;

  BoundedSimplex lp;
  std::vector<int> fvar(nn.m()), kvar(nn.n()), svar(nn.n());
  for (int a = 0; a < nn.m(); ++a)
    fvar[a] = lp.add_var(Rational(0), Rational(0),
                         Ext<Rational>(nn.arcs[a].upper));
  for (int i = 0; i < nn.n(); ++i) {
    kvar[i] = lp.add_var(Rational(nn.M[i]), Rational(0),
                         Ext<Rational>::infinity());
    svar[i] = lp.add_var(Rational(0), Rational(0), Ext<Rational>::infinity());
  }
  for (int i = 0; i < nn.n(); ++i) lp.add_constraint(nn.b[i]);
  for (int a = 0; a < nn.m(); ++a) {
    lp.set_coeff(nn.arcs[a].tail, fvar[a], Rational(-1));
    lp.set_coeff(nn.arcs[a].head, fvar[a], nn.arcs[a].gain.gamma);
  }
  std::vector<int> basis(nn.n());
  for (int i = 0; i < nn.n(); ++i) {
    lp.set_coeff(i, kvar[i], Rational(1));
    lp.set_coeff(i, svar[i], Rational(-1));
    basis[i] = (nn.b[i] >= 0) ? kvar[i] : svar[i];
  }

  auto sol = lp.solve(basis);
  if (!sol.optimal)
    throw invariant_error("reference LP reported unbounded objective");

  LpReferenceResult out;
  out.kappa = sol.objective;
  out.flows.resize(nn.m());
  for (int a = 0; a < nn.m(); ++a)
    out.flows[a] = sol.x[fvar[a]] + norm.lower_shift[a];
  // Excesses of the returned flow on the original instance.
  out.excesses.assign(net.n(), Rational(0));
  for (int i = 0; i < net.n(); ++i) out.excesses[i] = -net.b[i];
  for (int a = 0; a < net.m(); ++a) {
    out.excesses[net.arcs[a].tail] -= out.flows[a];
    out.excesses[net.arcs[a].head] +=
        net.arcs[a].gain.gamma * out.flows[a];
  }
  return out;
}

// --------------------------------------------------------------------------
// Piecewise-linear discretization.
// --------------------------------------------------------------------------

struct DiscretizeResult {
  Network net;        // all-linear; nonlinear arcs became k parallel arcs
  Rational gap;       // sound bound: |κ*(original) − κ*(net)| ≤ gap
  bool clipped = false;  // an arc with Γ(0) = −∞ was clipped to [δ, u]
};

// Discretizes each nonlinear gain into `segments` uniform secant pieces.
// Gains with Γ(0) = −∞ are clipped to [immense_clip, u] first; the sandwich
// bound in `gap` is sound only for instances without such arcs (clipping is
// reported so callers can refuse to certify).
//
// Breakpoint values are evaluated in double and converted to exact
// rationals; the rounding is folded into `gap`.
inline DiscretizeResult pwl_discretize(const Network& net, int segments,
                                       const Rational& immense_clip =
                                           Rational(1, 1000000)) {
  if (segments < 1) throw input_error("pwl_discretize: segments must be >= 1");
  if (immense_clip <= 0)
    throw input_error("pwl_discretize: immense clip must be positive");
  Normalized norm = normalize(net);
  const Network& nn = norm.net;

  DiscretizeResult out;
  std::vector<double> demand = norm.demands<double>();
  out.net.b.resize(nn.n());
  out.net.M = nn.M;
  Rational gap = 0;
  for (int i = 0; i < nn.n(); ++i) {
    out.net.b[i] = rational_from_double(demand[i]);
    // Demand rounding perturbs e_i one ulp-grade; account for it.
    gap += Rational(nn.M[i]) *
           rational_from_double(std::abs(demand[i]) * 1e-14 + 1e-300);
  }

  for (int ai = 0; ai < nn.m(); ++ai) {
    const Arc& a = nn.arcs[ai];
    if (a.gain.is_linear()) {
      out.net.add_arc(a.tail, a.head, Rational(0), a.upper, a.gain);
      continue;
    }
    GainOracle<double> g(a.gain);
    Rational lo(0);
    if (g.immense()) {
      out.clipped = true;
      lo = immense_clip;
      if (lo >= a.upper) lo = a.upper / 2;
      // Mandatory flow `lo`: shift it into the demands.
      out.net.b[a.tail] += lo;
      out.net.b[a.head] -=
          rational_from_double(g.value(to_real<double>(lo)));
    }
    const Rational width = (a.upper - lo) / segments;
    if (width <= 0) {
      out.net.add_arc(a.tail, a.head, Rational(0), Rational(0),
                      GainSpec::linear(Rational(1)));
      continue;
    }
    double err = 0.0;
    double ymax = 0.0;
    Rational prev_x = lo;
    Rational prev_y = rational_from_double(g.value(to_real<double>(lo)));
    for (int s = 1; s <= segments; ++s) {
      const Rational x = (s == segments) ? a.upper : lo + width * s;
      const Rational y = rational_from_double(g.value(to_real<double>(x)));
      Rational slope = (y - prev_y) / (x - prev_x);
      if (slope <= 0) {
        // Rounding collapsed a strictly increasing increment; keep the LP
        // valid with a tiny slope and charge the whole rise to the error.
        slope = rational_from_double(1e-30);
        err += std::abs(to_real<double>(y - prev_y)) + 1e-30;
      }
      // Concave deviation from the secant peaks at most twice its midpoint
      // value.
      const Rational mid = (prev_x + x) / 2;
      const double dev =
          g.value(to_real<double>(mid)) -
          (to_real<double>(prev_y) +
           to_real<double>(slope) * to_real<double>(mid - prev_x));
      if (dev > 0) err = std::max(err, 2.0 * dev);
      ymax = std::max(ymax, std::abs(to_real<double>(y)));
      out.net.add_arc(a.tail, a.head, Rational(0), x - prev_x,
                      GainSpec::linear(slope));
      prev_x = x;
      prev_y = y;
    }
    // Safety margin for double evaluation of the breakpoints themselves.
    err = err * (1.0 + 1e-9) + ymax * 1e-13 + 1e-300;
    gap += Rational(nn.M[a.head]) * rational_from_double(err);
  }
  out.gap = gap;
  out.net.validate();
  return out;
}

// --------------------------------------------------------------------------
// Certificate checking.
//
// A label vector μ (μ_i ≥ 1/M_i, possibly +∞) is *conservative* for flow f
// if every residual orientation of every arc has relabeled marginal gain at
// most 1, and μ_i = 1/M_i wherever e_i < 0.  It certifies optimality if
// additionally e_i = 0 wherever 1/M_i < μ_i < ∞ and e_i ≤ 0 wherever
// μ_i < ∞.  Arcs out of a +∞ node into a finite one violate conservativeness
// whenever they carry residual capacity; arcs into or between +∞ nodes are
// unconstrained.
// --------------------------------------------------------------------------

struct CertificateReport {
  bool conservative = true;
  bool optimal = true;  // conservative + complementary slackness
  std::vector<std::string> violations;
  double max_slack = 0.0;  // worst relative violation seen (float mode)

  void fail(bool opt_only, const std::string& msg) {
    (opt_only ? optimal : conservative) = false;
    if (!opt_only) optimal = false;
    if (violations.size() < 64) violations.push_back(msg);
  }
};

// Exact marginal slopes of a pwl gain at a point (right / left limits).
inline Rational pwl_right_slope(const GainSpec& g, const Rational& x) {
  std::size_t k = g.segment_by_x(x);
  if (k + 2 < g.px.size() && x >= g.px[k + 1]) ++k;
  return (g.py[k + 1] - g.py[k]) / (g.px[k + 1] - g.px[k]);
}
inline Rational pwl_left_slope(const GainSpec& g, const Rational& x) {
  std::size_t k = g.segment_by_x(x);
  if (k > 0 && x <= g.px[k]) --k;
  return (g.py[k + 1] - g.py[k]) / (g.px[k + 1] - g.px[k]);
}

// Exact check for rational instances (linear or pwl gains only).  `flows`
// are on the original arcs; `labels` indexed by node.
inline CertificateReport check_conservative_certificate(
    const Network& net, const std::vector<Rational>& flows,
    const std::vector<Ext<Rational>>& labels) {
  CertificateReport rep;
  if (static_cast<int>(flows.size()) != net.m() ||
      static_cast<int>(labels.size()) != net.n())
    throw input_error("certificate check: size mismatch");

  Normalized norm = normalize(net);
  const Network& nn = norm.net;
  if (!norm.b_exact())
    throw input_error(
        "exact certificate check requires rational gains (lin/pwl)");

  // Rebuild excesses exactly.
  std::vector<Rational> e(nn.n());
  for (int i = 0; i < nn.n(); ++i) e[i] = -nn.b[i];
  std::vector<Rational> nf(nn.m());
  for (int a = 0; a < nn.m(); ++a) {
    nf[a] = flows[a] - norm.lower_shift[a];
    if (nf[a] < 0 || nf[a] > nn.arcs[a].upper) {
      rep.fail(false, "arc " + std::to_string(a + 1) + ": flow out of bounds");
      continue;
    }
    e[nn.arcs[a].tail] -= nf[a];
    e[nn.arcs[a].head] += nn.arcs[a].gain.value_exact(nf[a]);
  }

  for (int i = 0; i < nn.n(); ++i) {
    const Rational floor = Rational(1) / Rational(nn.M[i]);
    if (!labels[i].is_inf() && labels[i].get() < floor)
      rep.fail(false, "node " + std::to_string(i + 1) +
                          ": label below 1/M");
    if (e[i] < 0 && (labels[i].is_inf() || labels[i].get() != floor))
      rep.fail(false, "node " + std::to_string(i + 1) +
                          ": deficit node not pinned at 1/M");
    if (labels[i].is_inf()) continue;
    if (e[i] > 0)
      rep.fail(true, "node " + std::to_string(i + 1) +
                         ": positive excess at a finite label");
    else if (e[i] != 0 && labels[i].get() > floor)
      rep.fail(true, "node " + std::to_string(i + 1) +
                         ": nonzero excess strictly between 1/M and +inf");
  }

  for (int a = 0; a < nn.m(); ++a) {
    const Arc& arc = nn.arcs[a];
    const auto& mu_t = labels[arc.tail];
    const auto& mu_h = labels[arc.head];
    const bool fwd_res = nf[a] < arc.upper;
    const bool bwd_res = nf[a] > 0;
    // Forward: μ_tail · Γ'(f⁺) ≤ μ_head.
    if (fwd_res && !mu_t.is_inf()) {
      // finite → anything: +∞ head is unconstrained.
      if (!mu_h.is_inf()) {
        Rational slope = arc.gain.is_linear()
                             ? arc.gain.gamma
                             : pwl_right_slope(arc.gain, nf[a]);
        if (mu_t.get() * slope > mu_h.get())
          rep.fail(false, "arc " + std::to_string(a + 1) +
                              ": forward relabeled gain exceeds 1");
      }
    }
    if (fwd_res && mu_t.is_inf() && !mu_h.is_inf())
      rep.fail(false, "arc " + std::to_string(a + 1) +
                          ": residual arc leaves a +inf node");
    // Backward: μ_head ≤ μ_tail · Γ'(f⁻).
    if (bwd_res && !mu_h.is_inf()) {
      if (!mu_t.is_inf()) {
        Rational slope = arc.gain.is_linear()
                             ? arc.gain.gamma
                             : pwl_left_slope(arc.gain, nf[a]);
        if (mu_h.get() > mu_t.get() * slope)
          rep.fail(false, "arc " + std::to_string(a + 1) +
                              ": backward relabeled gain exceeds 1");
      }
    }
    if (bwd_res && mu_h.is_inf() && !mu_t.is_inf())
      rep.fail(false, "arc " + std::to_string(a + 1) +
                          ": residual reverse arc leaves a +inf node");
  }
  return rep;
}

// Float-mode check for arbitrary gains; slack is relative.
inline CertificateReport check_conservative_certificate(
    const Network& net, const std::vector<double>& flows,
    const std::vector<Ext<double>>& labels, double tol = 1e-9) {
  CertificateReport rep;
  if (static_cast<int>(flows.size()) != net.m() ||
      static_cast<int>(labels.size()) != net.n())
    throw input_error("certificate check: size mismatch");

  Normalized norm = normalize(net);
  std::vector<double> demand = norm.demands<double>();
  FlowState<double> st(norm.net, demand, false);
  for (int a = 0; a < norm.net.m(); ++a) {
    double nf = flows[a] - to_real<double>(norm.lower_shift[a]);
    if (nf < -tol || nf > to_real<double>(norm.net.arcs[a].upper) * (1 + tol) + tol)
      rep.fail(false, "arc " + std::to_string(a + 1) + ": flow out of bounds");
    st.set_flow_clamped(a, nf);
  }

  auto slack = [&rep](double v) {
    if (v > rep.max_slack) rep.max_slack = v;
  };
  for (int i = 0; i < norm.net.n(); ++i) {
    const double floor = 1.0 / to_real<double>(Rational(norm.net.M[i]));
    const double e = st.excess(i);
    if (!labels[i].is_inf() && labels[i].get() < floor * (1 - tol))
      rep.fail(false, "node " + std::to_string(i + 1) + ": label below 1/M");
    if (e < -tol * (1 + std::abs(e))) {
      if (labels[i].is_inf() ||
          std::abs(labels[i].get() - floor) > tol * floor)
        rep.fail(false, "node " + std::to_string(i + 1) +
                            ": deficit node not pinned at 1/M");
    }
    if (labels[i].is_inf()) continue;
    const double scale = 1.0 + std::abs(e);
    if (e > tol * scale)
      rep.fail(true, "node " + std::to_string(i + 1) +
                         ": positive excess at a finite label");
    else if (std::abs(e) > tol * scale && labels[i].get() > floor * (1 + tol))
      rep.fail(true, "node " + std::to_string(i + 1) +
                         ": nonzero excess strictly between 1/M and +inf");
    slack(std::max(0.0, e) / scale);
  }

  for (int a = 0; a < norm.net.m(); ++a) {
    const Arc& arc = norm.net.arcs[a];
    const auto& mu_t = labels[arc.tail];
    const auto& mu_h = labels[arc.head];
    const double f = st.flow(a);
    const double u = st.capacity(a);
    const bool fwd_res = f < u;  // clamped flows saturate exactly
    const bool bwd_res = f > 0;
    if (fwd_res && mu_t.is_inf() && !mu_h.is_inf()) {
      rep.fail(false, "arc " + std::to_string(a + 1) +
                          ": residual arc leaves a +inf node");
    } else if (fwd_res && !mu_t.is_inf() && !mu_h.is_inf()) {
      const double g = st.gain(a).right_deriv(f);
      const double lhs = mu_t.get() * g;
      if (lhs > mu_h.get() * (1 + tol))
        rep.fail(false, "arc " + std::to_string(a + 1) +
                            ": forward relabeled gain exceeds 1");
      if (mu_h.get() > 0) slack(std::max(0.0, lhs / mu_h.get() - 1.0));
    }
    if (bwd_res && mu_h.is_inf() && !mu_t.is_inf()) {
      rep.fail(false, "arc " + std::to_string(a + 1) +
                          ": residual reverse arc leaves a +inf node");
    } else if (bwd_res && !mu_h.is_inf() && !mu_t.is_inf()) {
      const double g = st.gain(a).left_deriv(f);
      const double rhs = mu_t.get() * g;
      if (mu_h.get() > rhs * (1 + tol))
        rep.fail(false, "arc " + std::to_string(a + 1) +
                            ": backward relabeled gain exceeds 1");
      if (rhs > 0) slack(std::max(0.0, mu_h.get() / rhs - 1.0));
    }
  }
  return rep;
}

}  // namespace genflow
