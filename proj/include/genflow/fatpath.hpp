#pragma once
// Shared Δ-scaling engine for generalized-flow solvers.
//
// A phase at step size Δ alternates two operations until no node holds more
// than (d_i + 1)·Δ units of relabeled excess:
//
//   tighten_label — a multiplicative shortest-path sweep (Dijkstra over
//     residual orientations keyed by label-growth factors) that scales node
//     labels up until every overloaded node is connected to the relief set
//     by a path of tight, Δ-fat orientations;
//
//   augment — push Δ relabeled units along the recorded parent chain.
//
// The engine is model-independent: the only per-model ingredient is
// θ(orientation, μ_from, μ_to, Δ), the factor by which the from-side label
// must be multiplied to make the orientation tight at step size Δ.  θ must
// be linear in μ_from; a return value ≤ 0 marks the orientation unusable
// (e.g. a pull that would hit a -inf gain boundary).  For linear gains θ is
// the relabeled gain factor itself, independent of Δ and of the flow.
//
// Invariants checked while running (violations throw invariant_error):
//   * a phase starts with modified excess at most (2n+3m)·Δ,
//   * a phase performs at most 2n+3m augmentations,
//   * every augmenting-path orientation is tight (θ = 1 up to tolerance),
//   * in exact arithmetic, the overflow potential Σ⌈surplus/Δ⌉ never
//     increases under tighten_label and drops by exactly one per
//     augmentation.

#include <cassert>
#include <cstdlib>
#include <utility>
#include <vector>

#include <boost/heap/fibonacci_heap.hpp>

#include "flow.hpp"

namespace genflow {

struct EngineOptions {
  double tol = 1e-12;        // additive tie band for float classification
  double tol_theta = 1e-10;  // |θ - 1| tolerance on tight orientations
  int check_level = 1;       // 0: budget asserts, 1: + potential audit,
                             // 2: + full conservativity sweeps
};

template <class R>
struct PhaseStats {
  R delta{0};
  long augmentations = 0;
  R modified_excess_start{0};
};

// Output of one tighten_label sweep.  parent[i].arc < 0 means node i was
// settled as a root: either it started in the relief set, or it was admitted
// at its own neutrality cap (via_cap[i] set).
template <class R>
struct TightenResult {
  std::vector<DirArc> parent;
  std::vector<char> settled;
  std::vector<char> via_cap;
};

template <class R>
class FatPathEngine {
 public:
  FatPathEngine(FlowState<R>& st, EngineOptions opts = {})
      : st_(&st), opts_(opts) {
    const int n = st.n();
    mu_.reserve(n);
    active_.reserve(n);
    for (int i = 0; i < n; ++i) {
      mu_.push_back(R(1) / st.node_weight(i));
      active_.push_back(st.degree(i) > 0 ? 1 : 0);
    }
    tol_ = to_real<R>(Rational(0));
    tol_theta_ = to_real<R>(Rational(0));
    if constexpr (!real_traits<R>::exact) {
      tol_ = R(opts.tol);
      tol_theta_ = R(opts.tol_theta);
    }
    neg_base_.assign(n, 0);
    for (int i = 0; i < n; ++i)
      if (st.excess(i) < R(0)) neg_base_[i] = 1;
  }

  FlowState<R>& state() { return *st_; }
  const FlowState<R>& state() const { return *st_; }
  std::vector<R>& labels() { return mu_; }
  const std::vector<R>& labels() const { return mu_; }
  bool node_active(int i) const { return active_[i] != 0; }
  const EngineOptions& options() const { return opts_; }

  R relabeled_excess(int i) const { return st_->excess(i) / mu_[i]; }

  // Relabeled fatness of a residual orientation, measured at the label
  // `mu_to` of the node the orientation enters (callers pass the head's
  // final label during a sweep).
  R orientation_fatness(const DirArc& d, const R& mu_to) const {
    if (d.fwd)
      return (st_->gain_at_capacity(d.arc) - st_->gain_at_flow(d.arc)) /
             mu_to;
    return st_->flow(d.arc) / mu_to;
  }

  bool is_delta_fat(const DirArc& d, const R& mu_to, const R& delta) const {
    const R fat = orientation_fatness(d, mu_to);
    if (!real_traits<R>::is_finite(fat)) return true;  // unbounded headroom
    if constexpr (real_traits<R>::exact) return fat >= delta;
    return fat >= delta * (R(1) - tol_theta_);
  }

  // Relief set for a phase sweep: relabeled excess within the d_i·Δ
  // allowance.  Both set tests compare in relabeled units: the float tie
  // band carries an absolute floor, and node labels far below 1 (heavily
  // weighted nodes start at μ = 1/M_i) would otherwise shrink the raw
  // quantities underneath that floor, silently exempting nodes from the
  // overflow set while the (band-free) modified-excess sum still counts
  // them.  In exact arithmetic the two forms coincide.
  bool in_relief_set(int i, const R& delta) const {
    return leq_band(relabeled_excess(i), R(st_->degree(i)) * delta);
  }

  // Overflow set D: relabeled excess strictly above (d_i + 1)·Δ.
  bool in_overflow(int i, const R& delta) const {
    return gt_band(relabeled_excess(i), R(st_->degree(i) + 1) * delta);
  }

  // Σ over arc-incident nodes of max{e_i/μ_i − d_i·Δ, 0}.
  R modified_excess_active(const R& delta) const {
    R total(0);
    for (int i = 0; i < st_->n(); ++i) {
      if (!active_[i]) continue;
      const R surplus =
          st_->excess(i) / mu_[i] - R(st_->degree(i)) * delta;
      if (surplus > R(0)) total += surplus;
    }
    return total;
  }

  // Exact-mode overflow potential: Σ ⌈max{e_i/μ_i − (d_i+1)Δ, 0} / Δ⌉.
  // Tightening can only shrink it; each augmentation retires exactly one
  // unit.
  Integer overflow_potential(const R& delta) const {
    Integer total(0);
    if constexpr (real_traits<R>::exact) {
      for (int i = 0; i < st_->n(); ++i) {
        if (!active_[i]) continue;
        const Rational x =
            st_->excess(i) / mu_[i] - Rational(st_->degree(i) + 1) * delta;
        if (x > 0) total += ceil_to_int(x / delta);
      }
    }
    return total;
  }

  // One label-tightening sweep.  In phase mode (terminal = false) the relief
  // set holds nodes within their d_i·Δ allowance, overloaded nodes enter the
  // queue capped at the growth factor that makes them exactly neutral, and
  // only Δ-fat orientations are relaxed.  In terminal mode (Δ = 0, linear
  // gains) the relief set holds deficit nodes, there are no caps, every
  // residual orientation is relaxed, and nodes left unsettled are those the
  // caller should give an infinite label.
  template <class ThetaFn>
  TightenResult<R> tighten_label(const R& delta, ThetaFn&& theta,
                                 bool terminal = false) {
    const int n = st_->n();
    TightenResult<R> out;
    out.parent.assign(n, DirArc{-1, true});
    out.settled.assign(n, 0);
    out.via_cap.assign(n, 0);

    struct Entry {
      Ext<R> key;
      int node;
    };
    struct EntryCmp {
      bool operator()(const Entry& a, const Entry& b) const {
        if (a.key == b.key) return b.node < a.node;  // lower index first
        return b.key < a.key;                        // lower key first
      }
    };
    using Heap =
        boost::heap::fibonacci_heap<Entry, boost::heap::compare<EntryCmp>>;
    Heap heap;
    std::vector<typename Heap::handle_type> handle(n);
    std::vector<char> in_heap(n, 0), root0(n, 0);
    std::vector<Ext<R>> key(n, Ext<R>::infinity());

    for (int i = 0; i < n; ++i) {
      if (!active_[i]) continue;
      Ext<R> k = Ext<R>::infinity();
      if (terminal) {
        if (lt_band(st_->excess(i), R(0))) {
          k = Ext<R>(R(1));
          root0[i] = 1;
        }
      } else if (in_relief_set(i, delta)) {
        k = Ext<R>(R(1));
        root0[i] = 1;
      } else {
        // Growth factor at which i becomes exactly neutral.
        k = Ext<R>(st_->excess(i) / (mu_[i] * (R(st_->degree(i)) * delta)));
      }
      key[i] = k;
      handle[i] = heap.push(Entry{k, i});
      in_heap[i] = 1;
    }

    // Relax one residual orientation entering u (which just settled with
    // growth factor lambda_u; mu_[u] already carries it).
    const auto relax = [&](const DirArc& d, int u, const R& lambda_u) {
      const int v = st_->from(d);
      if (!in_heap[v]) return;
      if (!st_->residual(d)) return;
      if (!terminal && !is_delta_fat(d, mu_[u], delta)) return;
      const R th = theta(d, mu_[v], mu_[u], delta);
      if (!(th > R(0)) || !real_traits<R>::is_finite(th)) return;
      R cand = R(1) / th;
      if constexpr (real_traits<R>::exact) {
        if (cand < lambda_u)
          throw invariant_error(
              "tighten_label relaxation produced a non-monotone key");
      } else {
        if (cand < lambda_u) cand = lambda_u;
      }
      const Ext<R> ck(cand);
      if (ck < key[v]) {
        key[v] = ck;
        out.parent[v] = d;
        heap.update(handle[v], Entry{ck, v});
      }
    };

    R last_pop(1);
    while (!heap.empty()) {
      const Entry top = heap.top();
      if (terminal && top.key.inf) break;  // the rest stay unreached
      heap.pop();
      const int u = top.node;
      in_heap[u] = 0;
      out.settled[u] = 1;
      const R lambda = top.key.get();
      if constexpr (real_traits<R>::exact) {
        if (lambda < R(1) || lambda < last_pop)
          throw invariant_error(
              "tighten_label pop keys are not nondecreasing");
      }
      last_pop = lambda;
      if (lambda > R(1)) mu_[u] *= lambda;
      if (out.parent[u].arc < 0 && !root0[u]) out.via_cap[u] = 1;

      // Relax residual orientations entering u, at u's final label.
      for (int a : st_->adj().in[u]) relax(DirArc{a, true}, u, lambda);
      for (int a : st_->adj().out[u]) relax(DirArc{a, false}, u, lambda);
    }

    if (!terminal) {
      for (int i = 0; i < n; ++i)
        if (active_[i] && !out.settled[i])
          throw invariant_error("tighten_label left an active node unsettled");
    }
    return out;
  }

  // Push Δ relabeled units from `source` along the parent chain recorded by
  // the preceding tighten_label.  Every orientation on the path must be
  // tight.  Returns the number of arcs traversed.
  template <class ThetaFn>
  long augment(int source, const R& delta, const TightenResult<R>& tr,
               ThetaFn&& theta) {
    int cur = source;
    long steps = 0;
    bool moved = real_traits<R>::exact;  // exact pushes always move
    while (tr.parent[cur].arc >= 0) {
      const DirArc d = tr.parent[cur];
      const int vfrom = st_->from(d);
      const int vto = st_->to(d);
      if (vfrom != cur)
        throw invariant_error("augmenting parent chain is inconsistent");
      const R th = theta(d, mu_[vfrom], mu_[vto], delta);
      if constexpr (real_traits<R>::exact) {
        if (th != R(1))
          throw invariant_error("augmenting path orientation is not tight");
      } else {
        const R dev = th > R(1) ? R(th - R(1)) : R(R(1) - th);
        if (!(dev <= tol_theta_))
          throw invariant_error("augmenting path orientation is not tight");
      }
      const R fold = st_->flow(d.arc);
      if (d.fwd) {
        const R fnew = fold + delta * mu_[vfrom];
        if constexpr (real_traits<R>::exact) {
          if (fnew > st_->capacity(d.arc))
            throw invariant_error("push overshoots the arc capacity");
          st_->set_flow(d.arc, fnew);
        } else {
          st_->set_flow_clamped(d.arc, fnew);
        }
      } else {
        const R fnew = fold - delta * mu_[vto];
        if constexpr (real_traits<R>::exact) {
          if (fnew < R(0))
            throw invariant_error("pull undershoots the zero bound");
          st_->set_flow(d.arc, fnew);
        } else {
          st_->set_flow_clamped(d.arc, fnew);
        }
      }
      if (!(st_->flow(d.arc) == fold)) moved = true;
      cur = vto;
      if (++steps > st_->n())
        throw invariant_error("augmenting path is not simple");
    }
    // A float push of Δ·μ below the ulp of every flow on the path changes
    // nothing; the overflow node can then never drain and the phase would
    // spin into its augmentation budget.  Fail with the real cause instead:
    // the working precision cannot represent steps at this scale (raise the
    // precision or loosen the target accuracy).
    if (steps > 0 && !moved)
      throw invariant_error(
          "augmentation stalled below the arithmetic resolution of the "
          "flow state");
    return steps;
  }

  // Run one full phase at step size Δ: tighten, pick the lowest-index
  // overflow node, augment, repeat until the overflow set is empty.
  template <class ThetaFn>
  PhaseStats<R> run_phase(const R& delta, ThetaFn&& theta) {
    const long budget = 2L * st_->n() + 3L * st_->m();
    PhaseStats<R> stats;
    stats.delta = delta;
    stats.modified_excess_start = modified_excess_active(delta);
    if (!leq_band(stats.modified_excess_start, R(budget) * delta))
      throw invariant_error(
          "phase entered with modified excess above (2n+3m)delta");

    Integer psi_prev(0);
    bool have_psi = false;
    for (;;) {
      const TightenResult<R> tr = tighten_label(delta, theta, false);
      if (opts_.check_level >= 1) {
        if constexpr (real_traits<R>::exact) {
          const Integer psi = overflow_potential(delta);
          if (have_psi && psi > psi_prev)
            throw invariant_error(
                "tighten_label increased the overflow potential");
          psi_prev = psi;
          have_psi = true;
        }
      }
      if (opts_.check_level >= 2) sweep_conservative(delta, theta);

      int source = -1;
      for (int i = 0; i < st_->n(); ++i)
        if (active_[i] && in_overflow(i, delta)) {
          source = i;
          break;
        }
      if (source < 0) break;

      if (++stats.augmentations > budget)
        throw invariant_error("phase exceeded its 2n+3m augmentation budget");
      if (tr.parent[source].arc < 0)
        throw invariant_error("overflow node settled without a parent");

      augment(source, delta, tr, theta);

      if (opts_.check_level >= 1) {
        if constexpr (real_traits<R>::exact) {
          const Integer psi = overflow_potential(delta);
          if (psi != psi_prev - 1)
            throw invariant_error(
                "augmentation did not retire exactly one overflow unit");
          psi_prev = psi;
        }
      }
      if (opts_.check_level >= 2) sweep_no_new_negative();
    }
    return stats;
  }

  // Paranoid sweep: every Δ-fat residual orientation must satisfy θ ≤ 1
  // (conservative labels), up to tolerance in float mode.
  template <class ThetaFn>
  void sweep_conservative(const R& delta, ThetaFn&& theta) const {
    for (int a = 0; a < st_->m(); ++a) {
      for (bool fwd : {true, false}) {
        const DirArc d{a, fwd};
        if (!st_->residual(d)) continue;
        const int vto = st_->to(d);
        if (!is_delta_fat(d, mu_[vto], delta)) continue;
        const R th = theta(d, mu_[st_->from(d)], mu_[vto], delta);
        if (!(th > R(0))) continue;
        if constexpr (real_traits<R>::exact) {
          if (th > R(1))
            throw invariant_error("labels are not conservative on a fat "
                                  "residual orientation");
        } else {
          if (th > R(1) + R(4) * tol_theta_)
            throw invariant_error("labels are not conservative on a fat "
                                  "residual orientation");
        }
      }
    }
  }

  // Paranoid sweep: the deficit set never gains a member.
  void sweep_no_new_negative() {
    for (int i = 0; i < st_->n(); ++i) {
      if (neg_base_[i]) {
        if (!(st_->excess(i) < R(0))) neg_base_[i] = 0;  // deficit repaired
        continue;
      }
      if (lt_band(st_->excess(i), R(0)))
        throw invariant_error("an augmentation created a new deficit node");
    }
  }

 private:
  // x ≤ y up to the float tie band; exact comparison in rational mode.
  bool leq_band(const R& x, const R& y) const {
    if constexpr (real_traits<R>::exact) return x <= y;
    const R ax = x < R(0) ? R(-x) : x;
    const R ay = y < R(0) ? R(-y) : y;
    return x <= y + tol_ * (R(1) + ax + ay);
  }

  bool gt_band(const R& x, const R& y) const { return !leq_band(x, y); }

  // x < y with a band in float mode (strictly below the tie region).
  bool lt_band(const R& x, const R& y) const {
    if constexpr (real_traits<R>::exact) return x < y;
    const R ax = x < R(0) ? R(-x) : x;
    const R ay = y < R(0) ? R(-y) : y;
    return x < y - tol_ * (R(1) + ax + ay);
  }

  FlowState<R>* st_;
  EngineOptions opts_;
  std::vector<R> mu_;
  std::vector<char> active_;
  std::vector<char> neg_base_;
  R tol_, tol_theta_;
};

}  // namespace genflow
