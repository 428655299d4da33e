// Market-equilibrium front-ends.
//
// Builds concave-flow sink instances for linear Fisher markets and for
// nonsymmetric Arrow-Debreu Nash bargaining (ADNB: buyers hold disagreement
// utilities c_i and maximize sum m_i * ln(z_i - c_i)), extracts prices and
// allocations from the solver's dual labels, and recovers exact rational
// equilibria for integer ADNB data:
//
//   * the approximate solve runs at eps = 1/(2 K^n T), T = max{C, ceil(n K
//     ln K)+1}, K = n R U_max, in 50- or 100-digit floating point;
//   * every true optimal allocation entry is a multiple of some 1/S with
//     S <= K^n, and the approximate flow sits within T*eps of it, so entries
//     above 2*T*eps identify the support of the optimum;
//   * on that support, market clearing plus the equal-bang-per-buck equations
//     form a square rational linear system whose exact solution is verified
//     against the full KKT conditions.
//
// Uniqueness of the optimal allocation (needed for the support argument) is
// enforced by an escalating lexicographic perturbation U -> U*Q + rank,
// c -> c*Q; the system is always solved and verified with the original data,
// so a failed tier can only cost time, never correctness.

#pragma once

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "genflow/simplex.hpp"
#include "genflow/sink.hpp"

namespace genflow {

using Float50 = boost::multiprecision::cpp_bin_float_50;
using Float100 = boost::multiprecision::cpp_bin_float_100;
using Float200 =
    boost::multiprecision::number<boost::multiprecision::cpp_bin_float<200>>;

// --------------------------------------------------------------------------
// Instance model.
// --------------------------------------------------------------------------

struct MarketBuyer {
  std::string id;
  Integer budget{1};        // m_i >= 1
  Integer disagreement{0};  // c_i >= 0 (0 for Fisher)
};

struct MarketPair {
  int buyer = 0;
  int good = 0;
  Integer util{0};               // integer utility U_ij >= 0
  std::optional<GainSpec> gain;  // price-discrimination mode: concave gain
};

struct MarketInstance {
  std::vector<MarketBuyer> buyers;
  std::vector<std::string> goods;  // unit supply each
  std::vector<MarketPair> pairs;

  int nb() const { return static_cast<int>(buyers.size()); }
  int ng() const { return static_cast<int>(goods.size()); }
  int n_total() const { return nb() + ng(); }

  bool discrimination() const {
    for (const auto& p : pairs)
      if (p.gain) return true;
    return false;
  }

  void validate() const {
    if (buyers.empty()) throw input_error("market has no buyers");
    if (goods.empty()) throw input_error("market has no goods");
    for (const auto& b : buyers) {
      if (b.budget < 1) throw input_error("buyer budget must be a positive integer");
      if (b.disagreement < 0)
        throw input_error("disagreement utility must be nonnegative");
    }
    std::vector<bool> buyer_ok(buyers.size(), false), good_ok(goods.size(), false);
    std::vector<std::vector<bool>> seen(buyers.size(),
                                        std::vector<bool>(goods.size(), false));
    for (const auto& p : pairs) {
      if (p.buyer < 0 || p.buyer >= nb()) throw input_error("utility references unknown buyer");
      if (p.good < 0 || p.good >= ng()) throw input_error("utility references unknown good");
      if (p.util < 0) throw input_error("utilities must be nonnegative integers");
      if (seen[p.buyer][p.good]) throw input_error("duplicate (buyer, good) utility entry");
      seen[p.buyer][p.good] = true;
      if (p.util > 0 || p.gain) {
        buyer_ok[p.buyer] = true;
        good_ok[p.good] = true;
      }
    }
    for (int i = 0; i < nb(); ++i)
      if (!buyer_ok[i])
        throw input_error("buyer '" + buyers[i].id + "' values no good");
    for (int j = 0; j < ng(); ++j)
      if (!good_ok[j])
        throw input_error("good '" + goods[j] + "' is valued by no buyer");
  }

  int positive_pairs() const {
    int c = 0;
    for (const auto& p : pairs)
      if (p.util > 0 || p.gain) ++c;
    return c;
  }

  Integer u_max() const {
    Integer u = 1;
    for (const auto& p : pairs)
      if (p.util > u) u = p.util;
    return u;
  }
  Integer budget_max() const {
    Integer r = 1;
    for (const auto& b : buyers)
      if (b.budget > r) r = b.budget;
    return r;
  }
  Integer disagreement_max() const {
    Integer c = 0;
    for (const auto& b : buyers)
      if (b.disagreement > c) c = b.disagreement;
    return c;
  }

  // K = n * R * U_max, the grid constant behind every rationality bound.
  Integer rationality_k() const {
    Integer K = Integer(n_total()) * budget_max() * u_max();
    if (K > Integer("1000000000000000"))
      throw input_error("market exceeds desk-scale recovery limits");
    return K;
  }

  // T = max{C, ceil(n K ln K) + 1}: bounds both the optimal sink value's
  // magnitude and every dual label of a feasible run.
  Integer t_bound() const {
    const Integer K = rationality_k();
    const double kd = mpz_get_d(K.get_mpz_t());
    const double v = static_cast<double>(n_total()) * kd * std::log(kd);
    Integer t = Integer(std::ceil(v)) + 1;
    const Integer c = disagreement_max();
    return c > t ? c : t;
  }

  // eps = 1 / (2 K^n T): small enough that the approximate flow pins down
  // the support of the exact optimum.
  Rational recovery_eps() const {
    const Integer K = rationality_k();
    Rational e(1, 1);
    e /= Rational(2 * int_pow(K, n_total()) * t_bound());
    e.canonicalize();
    return e;
  }
};

// --------------------------------------------------------------------------
// Flow-instance construction.
//
// Node layout: goods first (0..ng-1, demand -1), buyers next (ng..ng+nb-1),
// sink t last.  One arc good->buyer per positive pair carrying the utility
// gain, one arc buyer->t carrying m_i * ln(.).
// --------------------------------------------------------------------------

struct MarketGraph {
  Network net;
  int t = 0;
  struct BuiltPair {
    int pair_index;  // into MarketInstance::pairs
    int buyer, good;
    Integer util;
    int arc;
  };
  std::vector<BuiltPair> pairs;   // positive pairs, in instance order
  std::vector<int> buyer_arc;     // buyer i -> t
};

namespace detail {

// Rational upper bound on Gamma(cap), exact for rational gain families.
inline Rational gain_value_upper(const GainSpec& g, const Rational& cap) {
  if (g.kind == GainKind::Linear || g.kind == GainKind::Pwl)
    return g.value_exact(cap);
  GainOracle<double> o(g);
  double v = o.value(real_to_double(to_real<double>(cap)));
  if (!std::isfinite(v)) throw input_error("gain is not finite at its capacity");
  return rational_upper(std::fabs(v));
}

inline MarketGraph build_market_graph(const MarketInstance& inst, bool adnb) {
  inst.validate();
  if (adnb && inst.discrimination())
    throw input_error("bargaining mode requires integer utilities");

  MarketGraph g;
  for (int j = 0; j < inst.ng(); ++j) g.net.add_node(-1);       // goods
  for (int i = 0; i < inst.nb(); ++i)                           // buyers
    g.net.add_node(adnb ? Rational(inst.buyers[i].disagreement) : Rational(0));
  g.t = g.net.add_node(0);

  const Rational pair_cap = adnb ? 2 : 1;
  std::vector<Rational> z_cap(inst.nb(), 0);  // sum of achievable utility
  for (int k = 0; k < static_cast<int>(inst.pairs.size()); ++k) {
    const MarketPair& p = inst.pairs[k];
    if (p.util == 0 && !p.gain) continue;
    GainSpec gain = p.gain ? *p.gain : GainSpec::linear(Rational(p.util));
    int arc = g.net.add_arc(p.good, inst.ng() + p.buyer, 0, pair_cap, gain);
    g.pairs.push_back({k, p.buyer, p.good, p.util, arc});
    if (p.gain)
      z_cap[p.buyer] += Rational(ceil_to_int(gain_value_upper(*p.gain, pair_cap)));
    else
      z_cap[p.buyer] += Rational(p.util) * pair_cap;
  }
  g.buyer_arc.resize(inst.nb());
  for (int i = 0; i < inst.nb(); ++i) {
    Rational cap = z_cap[i];
    if (!adnb && inst.buyers[i].disagreement != 0)
      throw input_error("Fisher mode requires zero disagreement utilities");
    g.buyer_arc[i] = g.net.add_arc(
        inst.ng() + i, g.t, 0, cap,
        GainSpec::log(Rational(inst.buyers[i].budget)));
  }
  g.net.validate();
  return g;
}

}  // namespace detail

// Fisher market (c == 0): arcs good->buyer carry U_ij * alpha with unit
// capacity; buyer->t carries m_i * ln(alpha) capped at total utility.
inline MarketGraph build_fisher(const MarketInstance& inst) {
  return detail::build_market_graph(inst, /*adnb=*/false);
}

// ADNB: buyer nodes demand their disagreement utility; capacities are doubled
// so no capacity constraint is ever tight at an optimum (the dual-label bound
// depends on that slack).
inline MarketGraph build_adnb(const MarketInstance& inst) {
  return detail::build_market_graph(inst, /*adnb=*/true);
}

// --------------------------------------------------------------------------
// Equilibrium extraction.
// --------------------------------------------------------------------------

struct Equilibrium {
  bool feasible = true;
  bool exact = false;
  int tier = 0;  // perturbation tier that produced the exact answer

  std::vector<double> prices;  // per good
  std::vector<double> alloc;   // per positive pair (MarketGraph order)
  std::vector<double> z;       // per buyer

  std::vector<Rational> prices_exact, alloc_exact, z_exact;  // recovery mode

  double clearing_residual = 0;  // max_j |sum_i x_ij - 1|
  double kkt_residual = 0;       // max relative bang-per-buck violation
  std::vector<int> near_infeasible;  // buyers with z_i - c_i near zero

  Integer denominator_cap{0};  // K^n
  Rational eps_used{0};
  Integer t_bound_used{0};
  long phases = 0;
  long total_augmentations = 0;
};

// Read prices off the dual labels (p_j = mu_t / mu_j with mu_t pinned at 1 by
// the reduction) and allocations off the flows; report KKT residuals for the
// linear-utility pairs.  Residuals are informative, not fatal.
template <class R>
inline Equilibrium extract_equilibrium(const MarketInstance& inst,
                                       const MarketGraph& g,
                                       const SinkSolveResult<R>& r,
                                       const Rational& eps_used) {
  Equilibrium eq;
  eq.eps_used = eps_used;
  eq.phases = r.phases;
  eq.total_augmentations = r.total_augmentations;
  if (!r.feasible) {
    eq.feasible = false;
    return eq;
  }
  if (r.labels[g.t] != Ext<R>(R(1)))
    throw invariant_error("sink label moved off 1; the sink cannot have been "
                          "in deficit throughout the run");
  const R mu_t = r.labels[g.t].get();

  eq.prices.resize(inst.ng());
  for (int j = 0; j < inst.ng(); ++j) {
    if (r.labels[j].is_inf())
      throw invariant_error("good carries an infinite label");
    eq.prices[j] = real_to_double(R(mu_t / r.labels[j].get()));
  }
  eq.alloc.resize(g.pairs.size());
  for (size_t k = 0; k < g.pairs.size(); ++k)
    eq.alloc[k] = real_to_double(r.flows[g.pairs[k].arc]);
  // The buyer->sink flow carries the surplus z_i - c_i (the buyer node's
  // demand already absorbs c_i).
  eq.z.resize(inst.nb());
  for (int i = 0; i < inst.nb(); ++i)
    eq.z[i] = real_to_double(r.flows[g.buyer_arc[i]]) +
              mpz_get_d(inst.buyers[i].disagreement.get_mpz_t());

  const double epsd = real_to_double(to_real<double>(eps_used));
  const double cmax =
      std::max(1.0, mpz_get_d(inst.disagreement_max().get_mpz_t()));
  const double flag_band = 1e4 * epsd * cmax;
  const double x_tiny = 1e4 * epsd;

  std::vector<double> clearing(inst.ng(), 0.0);
  for (size_t k = 0; k < g.pairs.size(); ++k)
    clearing[g.pairs[k].good] += eq.alloc[k];
  for (int j = 0; j < inst.ng(); ++j)
    eq.clearing_residual =
        std::max(eq.clearing_residual, std::fabs(clearing[j] - 1.0));

  std::vector<double> bang(inst.nb(), 0.0);
  for (int i = 0; i < inst.nb(); ++i) {
    const double ci = mpz_get_d(inst.buyers[i].disagreement.get_mpz_t());
    const double mi = mpz_get_d(inst.buyers[i].budget.get_mpz_t());
    const double surplus = eq.z[i] - ci;
    if (surplus <= flag_band) eq.near_infeasible.push_back(i);
    bang[i] = surplus / mi;
  }
  for (size_t k = 0; k < g.pairs.size(); ++k) {
    if (g.pairs[k].util == 0) continue;  // discrimination pair: no linear test
    const int i = g.pairs[k].buyer, j = g.pairs[k].good;
    if (bang[i] <= 0) continue;  // flagged above; ratio meaningless
    const double ratio = mpz_get_d(g.pairs[k].util.get_mpz_t()) / eq.prices[j];
    const double scale = std::max(1.0, bang[i]);
    eq.kkt_residual =
        std::max(eq.kkt_residual, std::max(0.0, ratio - bang[i]) / scale);
    if (eq.alloc[k] > x_tiny)
      eq.kkt_residual =
          std::max(eq.kkt_residual, std::fabs(ratio - bang[i]) / scale);
  }
  return eq;
}

// --------------------------------------------------------------------------
// Exact feasibility program.
//
//   maximize s  s.t.  sum_j U_ij x_ij - s >= c_i,  sum_i x_ij <= 1,
//                     0 <= x <= 1.
//
// The market admits an equilibrium iff the optimal margin is strictly
// positive (each buyer must beat the disagreement utility strictly, or the
// logarithmic objective is minus infinity).
// --------------------------------------------------------------------------

inline Rational adnb_feasibility_margin(const MarketInstance& inst) {
  inst.validate();
  if (inst.discrimination())
    throw input_error("feasibility program requires integer utilities");

  BoundedSimplex lp;
  const Rational cbig = Rational(inst.disagreement_max()) + 1;
  std::vector<std::vector<int>> xvar(inst.nb(),
                                     std::vector<int>(inst.ng(), -1));
  for (const auto& p : inst.pairs)
    if (p.util > 0)
      xvar[p.buyer][p.good] = lp.add_var(0, 0, Ext<Rational>(Rational(1)));
  const int svar =
      lp.add_var(-1, -cbig,
                 Ext<Rational>(Rational(inst.ng()) * Rational(inst.u_max()) + 1));
  std::vector<int> basis;
  for (int i = 0; i < inst.nb(); ++i) {  // sum U x - s - surp_i = c_i
    int row = lp.add_constraint(Rational(inst.buyers[i].disagreement));
    for (const auto& p : inst.pairs)
      if (p.util > 0 && p.buyer == i)
        lp.set_coeff(row, xvar[i][p.good], Rational(p.util));
    lp.set_coeff(row, svar, -1);
    int surp = lp.add_var(0, 0, Ext<Rational>::infinity());
    lp.set_coeff(row, surp, -1);
    basis.push_back(surp);  // starts at c_big - c_i >= 1
  }
  for (int j = 0; j < inst.ng(); ++j) {  // sum_i x_ij + slack_j = 1
    int row = lp.add_constraint(1);
    for (const auto& p : inst.pairs)
      if (p.util > 0 && p.good == j) lp.set_coeff(row, xvar[p.buyer][j], 1);
    int slack = lp.add_var(0, 0, Ext<Rational>(Rational(1)));
    lp.set_coeff(row, slack, 1);
    basis.push_back(slack);
  }
  auto res = lp.solve(basis);
  if (!res.optimal) throw invariant_error("feasibility program unbounded");
  Rational margin = -res.objective;  // cost was -s
  margin.canonicalize();
  return margin;
}

// --------------------------------------------------------------------------
// Exact rational recovery.
// --------------------------------------------------------------------------

namespace detail {

// Gaussian elimination over rationals; empty result when singular.
inline std::optional<std::vector<Rational>> solve_square_system(
    std::vector<std::vector<Rational>> a, std::vector<Rational> rhs) {
  const int n = static_cast<int>(a.size());
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    for (int r = col; r < n; ++r)
      if (a[r][col] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) return std::nullopt;
    std::swap(a[col], a[piv]);
    std::swap(rhs[col], rhs[piv]);
    for (int r = col + 1; r < n; ++r) {
      if (a[r][col] == 0) continue;
      Rational f = a[r][col] / a[col][col];
      a[r][col] = 0;
      for (int c = col + 1; c < n; ++c) a[r][c] -= f * a[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<Rational> x(n);
  for (int r = n - 1; r >= 0; --r) {
    Rational acc = rhs[r];
    for (int c = r + 1; c < n; ++c) acc -= a[r][c] * x[c];
    x[r] = acc / a[r][r];
    x[r].canonicalize();
  }
  return x;
}

}  // namespace detail

// Escalating lexicographic perturbation: tier 0 is the original instance;
// tier k multiplies utilities and disagreement values by Q = (P+1)*4^(k-1)
// and adds a distinct rank 1..P to each positive utility.  Feasibility and
// (for large Q) the optimal support are preserved; the support is always
// re-verified against the original data.
inline MarketInstance perturb_market(const MarketInstance& base, int tier) {
  if (tier == 0) return base;
  MarketInstance p = base;
  const Integer q =
      Integer(base.positive_pairs() + 1) * int_pow(Integer(4), tier - 1);
  Integer rank = 0;
  for (auto& pr : p.pairs)
    if (pr.util > 0) {
      ++rank;
      pr.util = pr.util * q + rank;
    }
  for (auto& b : p.buyers) b.disagreement *= q;
  return p;
}

struct AdnbOptions {
  int max_tiers = 4;
  EngineOptions engine{};
};

namespace detail {

template <class F>
struct AdnbTierOutcome {
  SinkSolveResult<F> solve;
  std::vector<bool> support;  // per MarketGraph pair
};

// One approximate solve on a (possibly perturbed) instance: build, solve to
// its recovery eps, check the proven dual-label bound, read off the support.
template <class F>
inline AdnbTierOutcome<F> run_adnb_tier(const MarketGraph& g,
                                        const Rational& eps, const Integer& t_bound,
                                        EngineOptions engine) {
  // Scale the float tie bands to the working precision; the defaults are
  // calibrated for double.
  const int digits = std::numeric_limits<F>::digits10;
  engine.tol = std::pow(10.0, -(digits - 8));
  engine.tol_theta = std::pow(10.0, -(digits - 10));

  SinkOptions so;
  so.ustar = Rational(t_bound);
  so.engine = engine;
  AdnbTierOutcome<F> out{solve_sink_concave<F>(g.net, g.t, eps, so), {}};

  if (out.solve.feasible) {
    const F cap = to_real<F>(Rational(t_bound)) * (F(1) + F(1e-6));
    for (int i = 0; i < g.net.n(); ++i) {
      if (i == g.t) continue;
      if (out.solve.labels[i].is_inf() || out.solve.labels[i].get() > cap)
        throw invariant_error(
            "a dual label exceeded its proven bound on a feasible market");
    }
    const F thresh = F(2) * to_real<F>(Rational(t_bound)) * to_real<F>(eps);
    out.support.resize(g.pairs.size());
    for (size_t k = 0; k < g.pairs.size(); ++k)
      out.support[k] = out.solve.flows[g.pairs[k].arc] > thresh;
  }
  return out;
}

// Solve the market-clearing + equal-bang system on the given support with the
// ORIGINAL data and verify the full KKT conditions exactly.  Any failure
// returns nullopt (the support was wrong; the caller escalates).
inline std::optional<Equilibrium> recover_on_support(
    const MarketInstance& inst, const MarketGraph& g,
    const std::vector<bool>& support, const Integer& denom_cap) {
  const int ng = inst.ng();
  // The graph may come from a perturbed instance; the system and all
  // verification below must use the ORIGINAL utilities.
  std::vector<Rational> uk(g.pairs.size());
  for (std::size_t k = 0; k < g.pairs.size(); ++k)
    uk[k] = Rational(inst.pairs[g.pairs[k].pair_index].util);
  std::vector<int> xcol(g.pairs.size(), -1);
  int nx = 0;
  std::vector<bool> good_has(ng, false);
  for (size_t k = 0; k < g.pairs.size(); ++k)
    if (support[k]) {
      xcol[k] = nx++;
      good_has[g.pairs[k].good] = true;
    }
  for (int j = 0; j < ng; ++j)
    if (!good_has[j]) return std::nullopt;  // good not sellable: wrong support

  const int dim = nx + ng;  // x's then q's (q_j = 1/p_j)
  std::vector<std::vector<Rational>> a(dim, std::vector<Rational>(dim, 0));
  std::vector<Rational> rhs(dim, 0);
  int row = 0;
  for (int j = 0; j < ng; ++j, ++row) {  // each good fully sold
    for (size_t k = 0; k < g.pairs.size(); ++k)
      if (support[k] && g.pairs[k].good == j) a[row][xcol[k]] = 1;
    rhs[row] = 1;
  }
  for (size_t k = 0; k < g.pairs.size(); ++k) {  // equal bang per buck
    if (!support[k]) continue;
    const int i = g.pairs[k].buyer;
    for (size_t k2 = 0; k2 < g.pairs.size(); ++k2)
      if (support[k2] && g.pairs[k2].buyer == i)
        a[row][xcol[k2]] = uk[k2];
    a[row][nx + g.pairs[k].good] =
        -uk[k] * Rational(inst.buyers[i].budget);
    rhs[row] = Rational(inst.buyers[i].disagreement);
    ++row;
  }
  auto sol = solve_square_system(std::move(a), std::move(rhs));
  if (!sol) return std::nullopt;

  // --- exact verification against the original instance ---
  std::vector<Rational> x(g.pairs.size(), 0), q(ng);
  for (size_t k = 0; k < g.pairs.size(); ++k)
    if (support[k]) {
      x[k] = (*sol)[xcol[k]];
      if (x[k] < 0) return std::nullopt;
    }
  for (int j = 0; j < ng; ++j) {
    q[j] = (*sol)[nx + j];
    if (q[j] <= 0) return std::nullopt;
  }
  std::vector<Rational> z(inst.nb(), 0), bang(inst.nb());
  for (size_t k = 0; k < g.pairs.size(); ++k)
    z[g.pairs[k].buyer] += uk[k] * x[k];
  for (int i = 0; i < inst.nb(); ++i) {
    Rational surplus = z[i] - Rational(inst.buyers[i].disagreement);
    if (surplus <= 0) return std::nullopt;
    bang[i] = surplus / Rational(inst.buyers[i].budget);
    bang[i].canonicalize();
  }
  for (int j = 0; j < ng; ++j) {  // clearing, rechecked
    Rational tot = 0;
    for (size_t k = 0; k < g.pairs.size(); ++k)
      if (g.pairs[k].good == j) tot += x[k];
    if (tot != 1) return std::nullopt;
  }
  for (size_t k = 0; k < g.pairs.size(); ++k) {  // KKT on every pair
    const Rational lhs = uk[k] * q[g.pairs[k].good];
    const Rational& b = bang[g.pairs[k].buyer];
    if (support[k]) {
      if (lhs != b) return std::nullopt;
    } else if (lhs > b) {
      return std::nullopt;
    }
  }
  for (size_t k = 0; k < g.pairs.size(); ++k) {  // rationality bound
    Rational xx = x[k];
    xx.canonicalize();
    if (xx.get_den() > denom_cap) return std::nullopt;
  }
  for (int j = 0; j < ng; ++j) {
    Rational qq = q[j];
    qq.canonicalize();
    if (qq.get_den() > denom_cap) return std::nullopt;
  }
  // Money identity (implied by the system; a failure is a coding bug).
  for (int i = 0; i < inst.nb(); ++i) {
    Rational spent = 0;
    for (size_t k = 0; k < g.pairs.size(); ++k)
      if (g.pairs[k].buyer == i) spent += x[k] / q[g.pairs[k].good];
    Rational expect =
        Rational(inst.buyers[i].budget) +
        Rational(inst.buyers[i].disagreement) / bang[i];
    if (spent != expect)
      throw invariant_error("buyer spending violates the budget identity");
  }

  Equilibrium eq;
  eq.feasible = true;
  eq.exact = true;
  eq.denominator_cap = denom_cap;
  eq.prices_exact.resize(ng);
  for (int j = 0; j < ng; ++j) {
    eq.prices_exact[j] = 1 / q[j];
    eq.prices_exact[j].canonicalize();
  }
  eq.alloc_exact = x;
  eq.z_exact = z;
  eq.prices.resize(ng);
  for (int j = 0; j < ng; ++j) eq.prices[j] = eq.prices_exact[j].get_d();
  eq.alloc.resize(x.size());
  for (size_t k = 0; k < x.size(); ++k) eq.alloc[k] = x[k].get_d();
  eq.z.resize(z.size());
  for (int i = 0; i < inst.nb(); ++i) eq.z[i] = z[i].get_d();
  return eq;
}

}  // namespace detail

// Full exact-recovery pipeline.  The feasibility verdict comes from the exact
// program above (the discrepancy test alone is one-sided); a contradiction
// between the two is an internal failure.  Feasible instances walk the
// perturbation tiers until a support passes exact verification.
inline Equilibrium recover_exact_adnb(const MarketInstance& inst,
                                      AdnbOptions opts = {}) {
  inst.validate();
  if (inst.discrimination())
    throw input_error("exact recovery requires integer utilities");

  const Rational margin = adnb_feasibility_margin(inst);
  const Integer denom_cap = int_pow(inst.rationality_k(), inst.n_total());

  for (int tier = 0; tier < opts.max_tiers; ++tier) {
    const MarketInstance pi = perturb_market(inst, tier);
    const MarketGraph g = build_adnb(pi);
    const Rational eps = pi.recovery_eps();
    const Integer t_bound = pi.t_bound();

    // Pick a working precision.  The binding constraint is not reading
    // labels to eps but *representing the final pushes*: the scaling loop
    // runs the step size down to Δ ≈ eps/(2·(2n+3m)), nodes weighted by the
    // penalty start at label 1/pen with pen ≈ 2·t_bound/eps, and a push
    // moves Δ·μ raw units onto flows as large as the instance magnitudes.
    // The smallest push is therefore ~eps² / (4·(2n+3m)·t_bound); it must
    // stay well above the ulp of the largest stored value, or pushes round
    // to no-ops and the final phases cannot drain their overflow nodes.
    const Integer inv_eps = 2 * int_pow(pi.rationality_k(), pi.n_total()) *
                            t_bound;  // = 1/eps exactly
    Rational big = sink_magnitude_upper(g.net);
    if (big < Rational(t_bound) + 1) big = Rational(t_bound) + 1;
    const Integer coeff = 2 * g.net.n() + 3 * g.net.m();
    const Integer raw_span =
        ceil_to_int(big) * 4 * coeff * (t_bound + 1);
    const size_t digits_needed =
        2 * mpz_sizeinbase(inv_eps.get_mpz_t(), 10) +
        mpz_sizeinbase(raw_span.get_mpz_t(), 10) + 16;

    bool solver_feasible;
    long phases = 0, total_aug = 0;
    std::vector<bool> support;
    if (digits_needed <= 50) {
      auto out = detail::run_adnb_tier<Float50>(g, eps, t_bound, opts.engine);
      solver_feasible = out.solve.feasible;
      phases = out.solve.phases;
      total_aug = out.solve.total_augmentations;
      support = std::move(out.support);
    } else if (digits_needed <= 100) {
      auto out = detail::run_adnb_tier<Float100>(g, eps, t_bound, opts.engine);
      solver_feasible = out.solve.feasible;
      phases = out.solve.phases;
      total_aug = out.solve.total_augmentations;
      support = std::move(out.support);
    } else if (digits_needed <= 200) {
      auto out = detail::run_adnb_tier<Float200>(g, eps, t_bound, opts.engine);
      solver_feasible = out.solve.feasible;
      phases = out.solve.phases;
      total_aug = out.solve.total_augmentations;
      support = std::move(out.support);
    } else {
      throw input_error(
          "exact recovery on this instance needs more than 200 decimal "
          "digits of working precision");
    }

    if (!solver_feasible && margin > 0)
      throw invariant_error(
          "discrepancy test declared an infeasible market although the "
          "feasibility program found a strict allocation");
    if (margin <= 0) {
      // The discrepancy test is one-sided, so the exact program decides.
      Equilibrium eq;
      eq.feasible = false;
      eq.eps_used = eps;
      eq.t_bound_used = t_bound;
      eq.phases = phases;
      eq.total_augmentations = total_aug;
      return eq;
    }

    auto eq = detail::recover_on_support(inst, g, support, denom_cap);
    if (eq) {
      eq->tier = tier;
      eq->eps_used = eps;
      eq->t_bound_used = t_bound;
      eq->phases = phases;
      eq->total_augmentations = total_aug;
      return *eq;
    }
  }
  throw invariant_error(
      "perturbation tiers exhausted without an exactly verified support");
}

}  // namespace genflow
