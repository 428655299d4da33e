// SPDX-License-Identifier: MIT
//
// Pseudoflow state over a normalized network (ℓ ≡ 0, Γ(0) = 0).
//
// Node excess:  e_i = Σ_{a into i} Γ_a(f_a) − Σ_{a out of i} f_a − b_i.
// A zero flow therefore leaves e_i = −b_i.  Excesses are maintained
// incrementally through set_flow and can be rebuilt from scratch; exact
// scalar types keep them exact.
//
// The symmetric objective is κ(f) = Σ_i M_i · max{−e_i, 0}.

#pragma once

#include <vector>

#include "genflow/network.hpp"
#include "genflow/rational.hpp"

namespace genflow {

// One residual orientation of an arc: forward (tail→head, room f < u) or
// backward (head→tail, room f > 0).
struct DirArc {
  int arc = -1;
  bool fwd = true;

  friend bool operator==(const DirArc& a, const DirArc& b) {
    return a.arc == b.arc && a.fwd == b.fwd;
  }
};

template <class R>
class FlowState {
 public:
  FlowState() = default;

  // `demand` must come from Normalized::demands<R>() (or equal net.b for
  // exact instances).  start_at_capacity selects f ≡ u instead of f ≡ 0.
  FlowState(const Network& net, std::vector<R> demand, bool start_at_capacity)
      : net_(&net), adj_(build_adjacency(net)), demand_(std::move(demand)) {
    oracle_.reserve(net.m());
    u_.reserve(net.m());
    gu_.reserve(net.m());
    for (int a = 0; a < net.m(); ++a) {
      oracle_.emplace_back(net.arcs[a].gain);
      u_.push_back(to_real<R>(net.arcs[a].upper));
      gu_.push_back(oracle_[a].value(u_[a]));
    }
    Mw_.reserve(net.n());
    for (int i = 0; i < net.n(); ++i) Mw_.push_back(to_real<R>(net.M[i]));
    f_.assign(net.m(), R(0));
    gf_.assign(net.m(), R(0));
    if (start_at_capacity)
      for (int a = 0; a < net.m(); ++a) {
        f_[a] = u_[a];
        gf_[a] = gu_[a];
      }
    recompute_excess();
  }

  const Network& net() const { return *net_; }
  const Adjacency& adj() const { return adj_; }
  int n() const { return net_->n(); }
  int m() const { return net_->m(); }
  int degree(int i) const { return adj_.degree[i]; }

  const GainOracle<R>& gain(int a) const { return oracle_[a]; }
  const R& capacity(int a) const { return u_[a]; }
  const R& gain_at_capacity(int a) const { return gu_[a]; }
  const R& flow(int a) const { return f_[a]; }
  const R& gain_at_flow(int a) const { return gf_[a]; }
  const std::vector<R>& flows() const { return f_; }
  const R& excess(int i) const { return e_[i]; }
  const R& demand(int i) const { return demand_[i]; }
  const R& node_weight(int i) const { return Mw_[i]; }

  int tail(int a) const { return net_->arcs[a].tail; }
  int head(int a) const { return net_->arcs[a].head; }

  // Endpoints of a residual orientation.
  int from(const DirArc& d) const { return d.fwd ? tail(d.arc) : head(d.arc); }
  int to(const DirArc& d) const { return d.fwd ? head(d.arc) : tail(d.arc); }

  bool residual(const DirArc& d) const {
    return d.fwd ? f_[d.arc] < u_[d.arc] : f_[d.arc] > R(0);
  }

  // Replaces f_a, updating both endpoint excesses by the exact deltas.
  void set_flow(int a, const R& fnew) {
    if (oracle_[a].immense() && fnew <= R(0))
      throw invariant_error("flow on a log-at-zero arc driven to its -inf boundary");
    const R gnew = oracle_[a].value(fnew);
    e_[tail(a)] -= fnew - f_[a];
    e_[head(a)] += gnew - gf_[a];
    f_[a] = fnew;
    gf_[a] = gnew;
  }

  // set_flow with the target clamped into [0, u]; shields float callers
  // from end-of-range rounding.
  void set_flow_clamped(int a, R fnew) {
    if (fnew < R(0)) fnew = R(0);
    if (fnew > u_[a]) fnew = u_[a];
    set_flow(a, fnew);
  }

  void recompute_excess() {
    e_.assign(net_->n(), R(0));
    for (int i = 0; i < net_->n(); ++i) e_[i] = -demand_[i];
    for (int a = 0; a < net_->m(); ++a) {
      e_[tail(a)] -= f_[a];
      e_[head(a)] += gf_[a];
    }
  }

  // Σ_i M_i · max{−e_i, 0}.
  R kappa() const {
    R total(0);
    for (int i = 0; i < net_->n(); ++i)
      if (e_[i] < R(0)) total += Mw_[i] * (-e_[i]);
    return total;
  }

 private:
  const Network* net_ = nullptr;
  Adjacency adj_;
  std::vector<GainOracle<R>> oracle_;
  std::vector<R> u_, gu_;      // capacity and Γ(capacity)
  std::vector<R> demand_, Mw_;
  std::vector<R> f_, gf_;      // flow and Γ(flow)
  std::vector<R> e_;           // excesses
};

// --------------------------------------------------------------------------
// Free-standing definitional operations.  These favour clarity over speed
// and recompute everything from scratch; the solvers keep incremental state
// and the test suite checks the two against each other.
// --------------------------------------------------------------------------

// Per-node excesses of `flows` on `net`.  In float mode, −∞ propagates
// naturally when an arc whose gain diverges at 0 carries zero flow.
template <class R>
inline std::vector<R> excess(const Network& net, const std::vector<R>& flows) {
  std::vector<R> e(net.n());
  for (int i = 0; i < net.n(); ++i) e[i] = -to_real<R>(net.b[i]);
  for (int a = 0; a < net.m(); ++a) {
    GainOracle<R> g(net.arcs[a].gain);
    e[net.arcs[a].tail] -= flows[a];
    e[net.arcs[a].head] += g.value(flows[a]);
  }
  return e;
}

template <class R>
inline R excess(const Network& net, const std::vector<R>& flows, int node) {
  return excess(net, flows)[node];
}

// Σ_i M_i · max{−e_i, 0}.
template <class R>
inline R excess_discrepancy(const Network& net, const std::vector<R>& flows) {
  std::vector<R> e = excess(net, flows);
  R total(0);
  for (int i = 0; i < net.n(); ++i)
    if (e[i] < R(0)) total += to_real<R>(Rational(net.M[i])) * (-e[i]);
  return total;
}

// Relabeled fatness of a residual orientation: forward, the gain-image
// headroom Γ(u) − Γ(f) relabeled at the head; backward, the flow itself
// relabeled at the original tail (the node the reverse traversal delivers
// to).  An orientation is Δ-fat iff this value is ≥ Δ.
template <class R>
inline R fatness(const Network& net, const std::vector<R>& flows,
                 const std::vector<R>& labels, const DirArc& d) {
  const Arc& a = net.arcs[d.arc];
  GainOracle<R> g(a.gain);
  if (d.fwd)
    return (g.value(to_real<R>(a.upper)) - g.value(flows[d.arc])) /
           labels[a.head];
  return flows[d.arc] / labels[a.tail];
}

// Total relabeled excess above the per-node allowance d_i·Δ:
//   Σ_i max{e_i/μ_i − d_i·Δ, 0}.
template <class R>
inline R modified_excess(const Network& net, const std::vector<R>& flows,
                         const std::vector<R>& labels, const R& delta) {
  std::vector<R> e = excess(net, flows);
  Adjacency adj = build_adjacency(net);
  R total(0);
  for (int i = 0; i < net.n(); ++i) {
    R surplus = e[i] / labels[i] - R(adj.degree[i]) * delta;
    if (surplus > R(0)) total += surplus;
  }
  return total;
}

// Largest integer appearing in demands, capacities and linear gain factors
// (numerators and denominators), at least 1.  Drives the exact solver's
// scale-termination threshold.
inline Integer magnitude_bound(const Network& net) {
  Integer B = 1;
  auto eat = [&B](const Rational& q) {
    Integer a = abs(q.get_num());
    if (a > B) B = a;
    if (q.get_den() > B) B = q.get_den();
  };
  for (const auto& b : net.b) eat(b);
  for (const auto& a : net.arcs) {
    eat(a.upper);
    eat(a.lower);
    if (a.gain.is_linear()) eat(a.gain.gamma);
  }
  return B;
}

// Least common multiple of the linear gain denominators (≥ 1).
inline Integer gain_denominator_lcm(const Network& net) {
  Integer L = 1;
  for (const auto& a : net.arcs)
    if (a.gain.is_linear()) L = lcm(L, a.gain.gamma.get_den());
  return L;
}

inline Integer max_node_weight(const Network& net) {
  Integer M = 1;
  for (const auto& w : net.M)
    if (w > M) M = w;
  return M;
}

// max{1, |b_i|, u_a, |Γ_a(u_a)|} over the instance, in scalar type R.
// Seeds the concave solver's initial scale.
template <class R>
inline R magnitude_bound_real(const FlowState<R>& st) {
  using std::abs;
  R U(1);
  for (int i = 0; i < st.n(); ++i) {
    R ab = abs(st.demand(i));
    if (ab > U) U = ab;
  }
  for (int a = 0; a < st.m(); ++a) {
    if (st.capacity(a) > U) U = st.capacity(a);
    R gu = abs(st.gain_at_capacity(a));
    if (real_traits<R>::is_finite(gu) && gu > U) U = gu;
  }
  return U;
}

}  // namespace genflow
