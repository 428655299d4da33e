#pragma once
// ε-approximate solver for the symmetric objective with concave increasing
// gains (linear, piecewise-linear, logarithmic, power, custom — mixed
// freely).  Runs the same Δ-scaling phase loop as the exact linear solver,
// with θ-linearization:
//
//   forward  θ = Δμ_i / (Γ⁻¹(Γ(f) + Δμ_j) − f)
//   backward θ = Δμ_q / (Γ(f) − Γ(f − Δμ_p))      over original a = (p→q)
//
// both linear in the from-side label.  For a linear arc θ reduces to the
// relabeled gain factor exactly, so on linear instances this solver replays
// the exact solver's phase semantics in floating point.
//
// The flow starts at full capacity (f = u), Δ at M·U + 1, and halves per
// phase; the loop stops after the first phase executed with
// (2n+3m)·Δ ≤ ε, at which point the objective is within ε of optimal.
// The phase count is therefore at most ⌈log₂((MU+1)(2n+3m)/ε)⌉ + 1.
//
// Works over any scalar R: double for ordinary runs, a wider float type for
// high-precision runs, or Rational (exact) when every gain is linear or
// piecewise-linear.

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "fatpath.hpp"

namespace genflow {

// θ for a general concave arc.  Returns 0 when the orientation cannot carry
// the step (e.g. a pull that would land on a -inf gain boundary); callers
// must have checked Δ-fatness.
template <class R>
struct ConcaveTheta {
  const FlowState<R>* st;
  R operator()(const DirArc& d, const R& mu_from, const R& mu_to,
               const R& delta) const {
    const Arc& arc = st->net().arcs[d.arc];
    if (arc.gain.is_linear()) {
      const R g = to_real<R>(arc.gain.gamma);
      return d.fwd ? R(g * mu_from / mu_to) : R(mu_from / (g * mu_to));
    }
    const GainOracle<R>& G = st->gain(d.arc);
    const R f = st->flow(d.arc);
    const R d_img = delta * mu_to;
    if (d.fwd) {
      // Saturating step: the whole remaining gain room fits inside the
      // target, so the flow lands exactly on the capacity.
      R den;
      if (st->gain_at_flow(d.arc) + d_img >= st->gain_at_capacity(d.arc))
        den = st->capacity(d.arc) - f;
      else
        den = G.inverse_increment(f, d_img);
      if (!(den > R(0))) return R(0);
      return delta * mu_from / den;
    }
    if (!(d_img < f) && G.immense()) return R(0);  // -inf boundary
    const R dx = d_img < f ? d_img : f;            // float guard at 0
    const R den = G.value_decrement(f, dx);
    if (!real_traits<R>::is_finite(den)) return R(0);
    if (!(den > R(0))) return R(0);
    return delta * mu_from / den;
  }
};

// Public θ operation with its precondition made explicit: the orientation
// must be residual and Δ-fat under the given labels.
template <class R>
inline R theta_linearized(const FlowState<R>& st, const std::vector<R>& mu,
                          const DirArc& d, const R& delta) {
  if (!st.residual(d))
    throw invariant_error("theta requires a residual orientation");
  const R fat = d.fwd ? R((st.gain_at_capacity(d.arc) -
                           st.gain_at_flow(d.arc)) /
                          mu[st.head(d.arc)])
                      : R(st.flow(d.arc) / mu[st.tail(d.arc)]);
  if (fat < delta)
    throw invariant_error("theta requires a delta-fat orientation");
  return ConcaveTheta<R>{&st}(d, mu[st.from(d)], mu[st.to(d)], delta);
}

// Between-scale repair for concave gains: every residual orientation that is
// Δ/2-fat with θ at step Δ/2 above 1 absorbs a relabeled step of Δ/2 at the
// orientation's head (forward: drive the gain image up by (Δ/2)μ_head;
// backward: pull (Δ/2)μ_tail flow out).  Leaves the labels Δ/2-conservative
// and grows the modified excess by at most (3/2)mΔ.
template <class R>
inline void adjust_concave(FatPathEngine<R>& eng, const R& delta) {
  FlowState<R>& st = eng.state();
  const std::vector<R>& mu = eng.labels();
  ConcaveTheta<R> theta{&st};
  const R half = delta / R(2);
  R tol_theta(0), tol(0);
  if constexpr (!real_traits<R>::exact) {
    tol_theta = R(eng.options().tol_theta);
    tol = R(eng.options().tol);
  }
  const R ex_before = eng.modified_excess_active(delta);

  for (int a = 0; a < st.m(); ++a) {
    bool adjusted_fwd = false;
    for (const bool fwd : {true, false}) {
      const DirArc d{a, fwd};
      if (!st.residual(d)) continue;
      const int vto = st.to(d);
      if (!eng.is_delta_fat(d, mu[vto], half)) continue;
      const R th = theta(d, mu[st.from(d)], mu[vto], half);
      if (!(th > R(1) + tol_theta)) continue;
      if (!fwd && adjusted_fwd)
        throw invariant_error(
            "both orientations of an arc demanded adjustment");
      if (fwd) adjusted_fwd = true;

      // Step sizes are built from the increment forms so the per-arc bound
      // check below stays meaningful when the increments are far below the
      // rounding floor of the point values.
      const R f = st.flow(a);
      R fnew, df, dg;
      if (fwd) {
        const R d_img = half * mu[vto];
        if (st.gain_at_flow(a) + d_img >= st.gain_at_capacity(a)) {
          fnew = st.capacity(a);  // saturate; drops out of the fat set
          df = fnew - f;
          dg = st.gain(a).value_decrement(fnew, df);
        } else {
          df = st.gain(a).inverse_increment(f, d_img);
          dg = d_img;
          fnew = f + df;
        }
      } else {
        df = half * mu[vto];
        if (df > f) df = f;
        dg = st.gain(a).value_decrement(f, df);
        fnew = f - df;
      }
      // Per-arc step bounds: relabeled flow and gain-image changes stay
      // within Δ/2 (θ > 1 caps the non-constructed side).
      const R slack = tol * (R(1) + half);
      if (df / mu[st.tail(a)] > half + slack ||
          (real_traits<R>::is_finite(dg) &&
           dg / mu[st.head(a)] > half + slack))
        throw invariant_error(
            "adjust moved an arc by more than delta/2 relabeled");
      if constexpr (real_traits<R>::exact) {
        st.set_flow(a, fnew);
      } else {
        st.set_flow_clamped(a, fnew);
      }
    }
  }

  const R ex_after = eng.modified_excess_active(half);
  const R growth_cap = R(3 * st.m()) * half;
  const R band = tol * (R(1) + ex_before + growth_cap);
  if (ex_after > ex_before + growth_cap + band)
    throw invariant_error(
        "adjust exceeded its (3/2)m*delta excess growth bound");
}

template <class R>
struct ConcavePhaseRow {
  R delta{0};
  R ex_start{0};   // modified excess at phase entry
  R kappa_end{0};  // objective value after the phase
  long augmentations = 0;
};

template <class R>
struct ConcaveSolveResult {
  std::vector<R> flows;     // on the original network
  std::vector<R> labels;
  std::vector<R> excesses;  // on the original network
  R kappa{0};
  long phases = 0;
  long total_augmentations = 0;
  std::vector<ConcavePhaseRow<R>> phase_log;
};

template <class R = double>
inline ConcaveSolveResult<R> solve_symmetric_concave(
    const Network& net, const R& eps, EngineOptions opts = {},
    const std::function<void(const ConcavePhaseRow<R>&)>& on_phase = {}) {
  net.validate();
  if (!(eps > R(0))) throw input_error("eps must be positive");

  Normalized nz = normalize(net);
  FlowState<R> st(nz.net, nz.template demands<R>(), /*start_at_capacity=*/true);
  FatPathEngine<R> eng(st, opts);
  ConcaveTheta<R> theta{&st};

  const R U = magnitude_bound_real(st);
  const R M = to_real<R>(max_node_weight(nz.net));
  const R coeff(2 * st.n() + 3 * st.m());
  R delta = M * U + R(1);

  ConcaveSolveResult<R> out;
  for (;;) {
    const PhaseStats<R> ps = eng.run_phase(delta, theta);
    ConcavePhaseRow<R> row{delta, ps.modified_excess_start, st.kappa(),
                           ps.augmentations};
    out.phase_log.push_back(row);
    out.total_augmentations += ps.augmentations;
    ++out.phases;
    if (on_phase) on_phase(row);
    if (coeff * delta <= eps) break;  // ε-optimal at the end of this phase
    adjust_concave(eng, delta);
    delta /= R(2);
  }

  // Phase-count bound: ⌈log2((MU+1)(2n+3m)/ε)⌉ + 1, floored at one phase.
  {
    const double arg = real_to_double(R(M * U + R(1))) *
                       real_to_double(coeff) / real_to_double(eps);
    const long cap =
        std::max(1L, static_cast<long>(
                         std::ceil(std::log2(arg * (1.0 + 1e-9)))) +
                         1L);
    if (out.phases > cap)
      throw invariant_error("phase count exceeded its logarithmic bound");
  }

  out.flows = nz.denormalize(st.flows());
  out.labels = eng.labels();
  out.excesses = excess(net, out.flows);
  out.kappa = st.kappa();
  return out;
}

}  // namespace genflow
