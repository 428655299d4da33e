#pragma once
// Exact solver for the symmetric objective on networks with linear gains.
//
// Requires integer demands, bounds (after lower-bound normalization the
// demands may pick up the gain denominators; the scale threshold accounts
// for them) and rational gain factors.  Runs the Δ-scaling phase loop in
// exact rational arithmetic, halving Δ until it is below the granularity
// 1 / ((2n+6m)·B^m) of vertex solutions, then canonicalizes the labels with
// a terminal tightening sweep (Δ = 0) and drains the remaining surplus to
// the deficit nodes with an exact max-flow restricted to tight residual
// orientations.  Nodes that cannot reach any deficit receive an infinite
// label; their surplus is free-standing and costs nothing.

#include <utility>
#include <vector>

#include "fatpath.hpp"

namespace genflow {

// θ for a linear arc: the relabeled gain factor of the orientation.  The
// step size and the flow do not enter.
template <class R>
struct LinearTheta {
  const FlowState<R>* st;
  R operator()(const DirArc& d, const R& mu_from, const R& mu_to,
               const R&) const {
    const R g = to_real<R>(st->net().arcs[d.arc].gain.gamma);
    return d.fwd ? R(g * mu_from / mu_to) : R(mu_from / (g * mu_to));
  }
};

// Between-scale repair: close every residual orientation whose relabeled
// gain exceeds 1 and whose relabeled fatness lies in [delta_out, delta), by
// pushing it below delta_out fatness (or onto its bound).  Afterward the
// labels are conservative for delta_out-fat orientations.  The modified
// excess measured at the new allowance grows by at most 3m(delta-delta_out)
// over its value at the old allowance.
inline void adjust_linear(FatPathEngine<Rational>& eng, const Rational& delta,
                          const Rational& delta_out) {
  FlowState<Rational>& st = eng.state();
  const std::vector<Rational>& mu = eng.labels();
  const Rational width = delta - delta_out;
  const Rational ex_before = eng.modified_excess_active(delta);
  for (int a = 0; a < st.m(); ++a) {
    const Rational g = st.net().arcs[a].gain.gamma;
    const int i = st.tail(a);
    const int j = st.head(a);
    if (st.flow(a) < st.capacity(a)) {  // forward orientation
      if (g * mu[i] > mu[j]) {
        const Rational fat =
            (st.gain_at_capacity(a) - st.gain_at_flow(a)) / mu[j];
        if (fat >= delta_out && fat < delta) {
          Rational fnew = st.flow(a) + width * mu[j] / g;
          if (fnew > st.capacity(a)) fnew = st.capacity(a);
          if ((fnew - st.flow(a)) / mu[i] > width ||
              g * (fnew - st.flow(a)) / mu[j] > width)
            throw invariant_error(
                "adjust moved an arc by more than delta-delta' relabeled");
          st.set_flow(a, fnew);
        }
      }
    }
    if (st.flow(a) > 0) {  // backward orientation
      if (mu[j] > g * mu[i]) {
        const Rational fat = st.flow(a) / mu[i];
        if (fat >= delta_out && fat < delta) {
          Rational fnew = st.flow(a) - width * mu[i];
          if (fnew < 0) fnew = 0;
          if ((st.flow(a) - fnew) / mu[i] > width ||
              g * (st.flow(a) - fnew) / mu[j] > width)
            throw invariant_error(
                "adjust moved an arc by more than delta-delta' relabeled");
          st.set_flow(a, fnew);
        }
      }
    }
  }
  const Rational ex_after = eng.modified_excess_active(delta_out);
  if (ex_after > ex_before + Rational(3 * st.m()) * width)
    throw invariant_error(
        "adjust exceeded its 3m(delta-delta') excess growth bound");
}

// Terminal tightening sweep (Δ = 0): canonicalize labels against the
// deficit set.  Returns the sweep result; unsettled arc-incident nodes are
// exactly those that deserve an infinite label.
inline TightenResult<Rational> tighten_label_linear_terminal(
    FatPathEngine<Rational>& eng) {
  LinearTheta<Rational> theta{&eng.state()};
  return eng.tighten_label(Rational(0), theta, true);
}

// Exact max-flow from surplus nodes to deficit nodes along tight residual
// orientations (relabeled gain exactly 1), in relabeled units.  Shortest
// augmenting paths; capacities and excess bounds are read live from the
// flow state.  Throws if any settled node is left with positive excess.
inline long terminal_max_flow(FatPathEngine<Rational>& eng,
                              const std::vector<char>& settled) {
  FlowState<Rational>& st = eng.state();
  const std::vector<Rational>& mu = eng.labels();
  const int n = st.n();

  const auto tight = [&](int a) {
    // Both orientations of arc a are tight under the same condition.
    return st.net().arcs[a].gain.gamma * mu[st.tail(a)] == mu[st.head(a)];
  };
  const auto cap = [&](const DirArc& d) {
    const int p = st.tail(d.arc);
    return d.fwd ? Rational((st.capacity(d.arc) - st.flow(d.arc)) / mu[p])
                 : Rational(st.flow(d.arc) / mu[p]);
  };

  long pushes = 0;
  const long guard = 10L * (n + 1) * (st.m() + 1);
  for (;;) {
    // BFS from all surplus nodes to the nearest deficit node.
    std::vector<DirArc> par(n, DirArc{-1, true});
    std::vector<char> vis(n, 0), is_root(n, 0);
    std::vector<int> queue;
    for (int i = 0; i < n; ++i)
      if (settled[i] && st.degree(i) > 0 && st.excess(i) > 0) {
        vis[i] = 1;
        is_root[i] = 1;
        queue.push_back(i);
      }
    int reached = -1;
    for (size_t qh = 0; qh < queue.size() && reached < 0; ++qh) {
      const int u = queue[qh];
      if (st.excess(u) < 0) {
        reached = u;
        break;
      }
      const auto try_arc = [&](const DirArc& d) {
        const int v = st.to(d);
        if (vis[v] || !settled[v]) return;
        if (!st.residual(d) || !tight(d.arc)) return;
        vis[v] = 1;
        par[v] = d;
        queue.push_back(v);
        if (reached < 0 && st.excess(v) < 0) reached = v;
      };
      for (int a : st.adj().out[u]) try_arc(DirArc{a, true});
      for (int a : st.adj().in[u]) try_arc(DirArc{a, false});
    }
    if (reached < 0) break;

    // Bottleneck over the path, including both excess endpoints.
    Rational beta = -st.excess(reached) / mu[reached];
    for (int cur = reached; !is_root[cur];) {
      const DirArc d = par[cur];
      const Rational c = cap(d);
      if (c < beta) beta = c;
      cur = st.from(d);
    }
    {
      int cur = reached;
      while (!is_root[cur]) cur = st.from(par[cur]);
      const Rational avail = st.excess(cur) / mu[cur];
      if (avail < beta) beta = avail;
    }
    if (!(beta > 0))
      throw invariant_error("max-flow augmenting path with zero bottleneck");

    for (int cur = reached; !is_root[cur];) {
      const DirArc d = par[cur];
      const int p = st.tail(d.arc);
      st.set_flow(d.arc, d.fwd ? Rational(st.flow(d.arc) + beta * mu[p])
                               : Rational(st.flow(d.arc) - beta * mu[p]));
      cur = st.from(d);
    }
    if (++pushes > guard)
      throw invariant_error("terminal max-flow failed to terminate");
  }

  for (int i = 0; i < n; ++i)
    if (settled[i] && st.excess(i) > 0)
      throw invariant_error(
          "surplus left at a finite-label node after the terminal drain");
  return pushes;
}

struct LinearPhaseRow {
  Rational delta;
  Rational ex_start;   // modified excess at phase entry
  Rational kappa_end;  // objective value after the phase
  long augmentations = 0;
};

struct LinearSolveResult {
  std::vector<Rational> flows;        // on the original network
  std::vector<Ext<Rational>> labels;  // conservative, canonical
  std::vector<Rational> excesses;     // on the original network
  Rational kappa{0};
  long phases = 0;
  long total_augmentations = 0;
  std::vector<LinearPhaseRow> phase_log;
};

inline LinearSolveResult solve_symmetric_linear(const Network& net,
                                                EngineOptions opts = {}) {
  net.validate();
  for (const Arc& a : net.arcs)
    if (a.gain.kind != GainKind::Linear)
      throw input_error("the exact solver handles linear gains only");
  for (const Rational& bi : net.b)
    if (bi.get_den() != 1)
      throw input_error("the exact solver requires integer demands");
  for (const Arc& a : net.arcs)
    if (a.lower.get_den() != 1 || a.upper.get_den() != 1)
      throw input_error("the exact solver requires integer arc bounds");

  Normalized nz = normalize(net);
  FlowState<Rational> st(nz.net, nz.demands<Rational>(), false);
  FatPathEngine<Rational> eng(st, opts);
  LinearTheta<Rational> theta{&st};

  const Integer B = magnitude_bound(nz.net);
  const Integer M = max_node_weight(nz.net);
  const long nn = st.n(), mm = st.m();
  const Rational coeff(2 * nn + 6 * mm);
  const Rational threshold = Rational(1) / Rational(int_pow(B, mm));

  Rational delta = Rational(M) * Rational(B) * Rational(B) + 1;
  LinearSolveResult out;
  while (coeff * delta >= threshold) {
    const PhaseStats<Rational> ps = eng.run_phase(delta, theta);
    adjust_linear(eng, delta, delta / 2);
    out.phase_log.push_back(
        {delta, ps.modified_excess_start, st.kappa(), ps.augmentations});
    out.total_augmentations += ps.augmentations;
    ++out.phases;
    delta /= 2;
  }
  adjust_linear(eng, delta, Rational(0));

  const TightenResult<Rational> term = tighten_label_linear_terminal(eng);
  terminal_max_flow(eng, term.settled);

  const int n = st.n();
  out.labels.assign(n, Ext<Rational>::infinity());
  for (int i = 0; i < n; ++i) {
    if (st.degree(i) == 0) {
      if (!(st.excess(i) > 0)) out.labels[i] = Ext<Rational>(eng.labels()[i]);
    } else if (term.settled[i]) {
      out.labels[i] = Ext<Rational>(eng.labels()[i]);
    }
  }
  for (int i = 0; i < n; ++i)
    if (st.excess(i) < 0 &&
        (out.labels[i].inf ||
         out.labels[i].get() * to_real<Rational>(nz.net.M[i]) != 1))
      throw invariant_error("a deficit node ended with a label above 1/M");

  out.flows = nz.denormalize(st.flows());
  out.excesses = excess(net, out.flows);
  out.kappa = st.kappa();
  {
    Rational check(0);
    for (int i = 0; i < n; ++i)
      if (out.excesses[i] < 0)
        check += to_real<Rational>(net.M[i]) * (-out.excesses[i]);
    if (check != out.kappa)
      throw invariant_error(
          "objective value changed under lower-bound denormalization");
  }
  return out;
}

}  // namespace genflow
