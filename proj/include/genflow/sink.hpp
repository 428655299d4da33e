// Sink-objective solver: maximize the excess reaching a designated sink node t
// subject to e_i >= 0 everywhere else, by reduction to the symmetric
// penalty formulation.  The reduction replaces b_t with a strict upper bound
// on the net inflow at t and gives every other node a large penalty weight;
// the symmetric optimum then either certifies infeasibility or yields a
// solution whose sink excess is within eps of the sink optimum.
//
// Two paths:
//   * solve_sink_linear  — all-linear gains, integer data: exact optimum,
//     penalties M_i = B^n + 1, infeasible iff any non-sink excess is negative.
//   * solve_sink_concave — general concave gains: penalties ceil(2U*/eps)+1,
//     infeasible iff the symmetric discrepancy exceeds 2U* + eps.

#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "genflow/concave_solver.hpp"
#include "genflow/fatpath.hpp"
#include "genflow/flow.hpp"
#include "genflow/gain.hpp"
#include "genflow/linear_solver.hpp"
#include "genflow/network.hpp"
#include "genflow/rational.hpp"

namespace genflow {

struct SinkOptions {
  std::optional<Rational> ustar;  // net-inflow bound; default d_t * U
  EngineOptions engine{};
};

template <class R>
struct SinkSolveResult {
  bool feasible = false;
  std::vector<R> flows;          // on the user's network
  std::vector<Ext<R>> labels;    // dual labels from the symmetric solve
  std::vector<R> excesses;  // user's demands, including the original b_t
  R net_inflow_t{0};        // sum_in Gamma(f) - sum_out f at the sink
  R e_t_user{0};            // net_inflow_t - user's b_t
  R kappa_symmetric{0};     // discrepancy of the reduced symmetric instance
  Rational b_t_reduced{0};  // demand placed on t by the reduction
  Integer penalty{1};       // weight given to every non-sink node
  Rational ustar{0};        // net-inflow bound used (concave path only)
  long phases = 0;
  long total_augmentations = 0;
};

// True when the arc's gain is minus infinity at the arc's own lower bound
// (e.g. a logarithmic gain with lower capacity 0).  Such an arc entering the
// sink makes the default net-inflow bound unusable, because no finite bound
// on how negative e_t can remain over the feasible set follows from the
// instance magnitudes alone.
inline bool gain_unbounded_below_at_lower(const Arc& a) {
  GainOracle<double> g(a.gain);
  if (g.immense() && a.lower <= 0) return true;
  return !std::isfinite(g.value(real_to_double(to_real<double>(a.lower))));
}

namespace detail {

// Rational upper bound on a nonnegative double, sound for values computed
// with relative error well below 2^-20 (log/exp in double are ~1e-16).
inline Rational rational_upper(double x) {
  if (x <= 0) return Rational(0);
  Rational r = rational_from_double(x);
  const Rational slack(1, 1 << 20);
  return r + r * slack + slack;
}

}  // namespace detail

// max{1, |b_i|, u_a, |l_a|, |Gamma_a(u_a)|, |Gamma_a(l_a)|} as an exact or
// safely rounded-up rational.  Any valid magnitude bound works here; exact
// gain families contribute exact values, smooth ones a 2^-20-inflated bound.
inline Rational sink_magnitude_upper(const Network& net) {
  Rational U(1);
  auto eat = [&U](const Rational& q) {
    Rational a = Rational(abs(q));
    if (a > U) U = a;
  };
  for (const Rational& bi : net.b) eat(bi);
  for (const Arc& a : net.arcs) {
    eat(a.upper);
    eat(a.lower);
    if (a.gain.kind == GainKind::Linear || a.gain.kind == GainKind::Pwl) {
      eat(a.gain.value_exact(a.upper));
      eat(a.gain.value_exact(a.lower));
    } else {
      GainOracle<double> g(a.gain);
      double gu = std::fabs(g.value(real_to_double(to_real<double>(a.upper))));
      if (std::isfinite(gu)) {
        Rational r = detail::rational_upper(gu);
        if (r > U) U = r;
      }
      double gl = std::fabs(g.value(real_to_double(to_real<double>(a.lower))));
      if (std::isfinite(gl)) {
        Rational r = detail::rational_upper(gl);
        if (r > U) U = r;
      }
    }
  }
  return U;
}

// Default net-inflow bound d_t * U.  Requires every arc entering t to have a
// finite gain at its lower capacity; otherwise the caller must supply a bound.
inline Rational default_ustar(const Network& net, int t) {
  if (t < 0 || t >= net.n()) throw input_error("sink node out of range");
  int dt = 0;
  for (const Arc& a : net.arcs) {
    if (a.tail == t) ++dt;
    if (a.head == t) {
      ++dt;
      if (gain_unbounded_below_at_lower(a))
        throw input_error(
            "an arc into the sink has gain -inf at its lower capacity; "
            "supply an explicit net-inflow bound (--ustar)");
    }
  }
  return Rational(dt) * sink_magnitude_upper(net);
}

namespace detail {

// Shared interpretation step: recover the sink-objective quantities from the
// symmetric solve of the reduced instance and check the bound calibration.
template <class R, class Result>
inline void interpret_sink(const Network& user, int t, const Rational& b_t_red,
                           const Result& inner, double band,
                           SinkSolveResult<R>& out) {
  out.flows = inner.flows;
  out.kappa_symmetric = inner.kappa;
  out.b_t_reduced = b_t_red;
  out.phases = inner.phases;
  out.total_augmentations = inner.total_augmentations;

  // inner.excesses are against the reduced demands; only b_t differs.
  const R e_t_red = inner.excesses[t];
  out.net_inflow_t = e_t_red + to_real<R>(b_t_red);
  out.e_t_user = out.net_inflow_t - to_real<R>(user.b[t]);
  out.excesses = inner.excesses;
  out.excesses[t] = out.e_t_user;

  // The reduced demand strictly dominates every achievable net inflow by at
  // least 1, so a reduced sink excess near zero means the supplied bound was
  // not actually a bound.
  if (!(e_t_red <= R(0) - R(1) + to_real<R>(rational_from_double(band))))
    throw input_error(
        "solution drove the sink excess above the claimed net-inflow bound; "
        "the supplied --ustar is too small for this instance");
}

}  // namespace detail

// Exact path: every gain linear, integer demands and capacities.
// Penalties M_i = B^n + 1 force all non-sink excesses to zero whenever the
// sink problem is feasible; a single negative non-sink excess in the exact
// optimum certifies infeasibility.
inline SinkSolveResult<Rational> solve_sink_linear(const Network& net, int t,
                                                   SinkOptions opts = {}) {
  net.validate();
  if (t < 0 || t >= net.n()) throw input_error("sink node out of range");
  for (const Arc& a : net.arcs)
    if (a.gain.kind != GainKind::Linear)
      throw input_error("the exact sink path handles linear gains only");

  // Strict integer upper bound on sum gamma_jt*u_jt - sum l_tj over all
  // pseudoflows, hence on the net inflow at t.
  Rational inflow_sup(0);
  for (const Arc& a : net.arcs) {
    if (a.head == t) inflow_sup += a.gain.gamma * a.upper;
    if (a.tail == t) inflow_sup -= a.lower;
  }
  const Rational b_t_red = Rational(ceil_to_int(inflow_sup + 1));

  const Normalized nz = normalize(net);
  const Integer B = magnitude_bound(nz.net);
  const Integer pen = int_pow(B, net.n()) + 1;

  Network red = net;
  red.b[t] = b_t_red;
  for (int i = 0; i < red.n(); ++i) red.M[i] = (i == t) ? 1 : pen;

  const LinearSolveResult inner = solve_symmetric_linear(red, opts.engine);

  SinkSolveResult<Rational> out;
  out.penalty = pen;
  out.labels = inner.labels;
  detail::interpret_sink<Rational>(net, t, b_t_red, inner, 0.0, out);

  out.feasible = true;
  for (int i = 0; i < net.n(); ++i)
    if (i != t && inner.excesses[i] < 0) out.feasible = false;

  if (out.feasible) {
    // With all other excesses nonnegative the entire discrepancy sits at the
    // sink: kappa = b_t_reduced - net_inflow, exactly.
    if (out.kappa_symmetric != Rational(b_t_red) - out.net_inflow_t)
      throw invariant_error("sink round-trip identity failed on the exact path");
  }
  return out;
}

// Approximate path for general concave gains.  Solves the reduced symmetric
// instance to eps-optimality; the discrepancy test separates infeasible
// instances from ones where all non-sink excess violations together stay
// below eps and the sink excess is within eps of its optimum.
template <class R = double>
inline SinkSolveResult<R> solve_sink_concave(
    const Network& net, int t, const Rational& eps, SinkOptions opts = {},
    const std::function<void(const ConcavePhaseRow<R>&)>& on_phase = {}) {
  net.validate();
  if (t < 0 || t >= net.n()) throw input_error("sink node out of range");
  if (!(eps > 0)) throw input_error("eps must be positive");

  Rational ustar;
  if (opts.ustar) {
    ustar = *opts.ustar;
    ustar.canonicalize();
    if (ustar < sink_magnitude_upper(net))
      throw input_error("--ustar is below the instance magnitude bound");
  } else {
    ustar = default_ustar(net, t);
  }

  const Rational b_t_red = ustar + 1;
  const Integer pen = ceil_to_int(Rational(2) * ustar / eps) + 1;

  Network red = net;
  red.b[t] = b_t_red;
  for (int i = 0; i < red.n(); ++i) red.M[i] = (i == t) ? 1 : pen;

  const ConcaveSolveResult<R> inner =
      solve_symmetric_concave<R>(red, to_real<R>(eps), opts.engine, on_phase);

  SinkSolveResult<R> out;
  out.penalty = pen;
  out.ustar = ustar;
  out.labels.reserve(inner.labels.size());
  for (const R& mu : inner.labels) out.labels.push_back(Ext<R>(mu));
  const double band =
      real_traits<R>::exact ? 0.0 : opts.engine.tol * (1.0 + real_to_double(to_real<R>(ustar)));
  detail::interpret_sink<R>(net, t, b_t_red, inner, band, out);

  // Feasible iff the discrepancy is small enough that a feasible witness
  // (which always admits kappa <= 2*ustar + 1) cannot have been beaten.
  out.feasible = !(out.kappa_symmetric > to_real<R>(Rational(2) * ustar + eps));

  if (out.feasible) {
    // Penalty choice guarantees the total non-sink violation is below eps.
    R viol(0);
    for (int i = 0; i < net.n(); ++i)
      if (i != t && out.excesses[i] < R(0)) viol -= out.excesses[i];
    if (!(viol <= to_real<R>(eps) * (R(1) + to_real<R>(rational_from_double(opts.engine.tol)))))
      throw invariant_error("non-sink excess violations exceed eps");
  }
  return out;
}

}  // namespace genflow
