// Seeded random instance families for tests and benchmarks.
//
// Draws go through mt19937_64 (bit-exact across platforms by definition) and
// a plain modulo reduction; std::uniform_int_distribution is deliberately
// avoided because its mapping is implementation-defined and would make seeds
// non-portable.  The slight modulo bias is irrelevant for test corpora.
//
// Families:
//   gen_linear(seed)   — small all-linear networks with integer data, sized
//                        so an exact LP reference can certify the optimum.
//   gen_concave(seed)  — small mixed-gain networks (linear / log / power /
//                        piecewise-linear), always at least one nonlinear arc,
//                        log arcs given positive lower bounds so every gain is
//                        finite over its whole flow range.
//   gen_adnb(seed, force_infeasible)
//                      — bargaining markets with integer utilities/budgets;
//                        the infeasible variant raises one disagreement value
//                        above that buyer's best achievable utility.

#pragma once

#include <cassert>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "genflow/market.hpp"
#include "genflow/network.hpp"

namespace genflow {
namespace detail {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform-ish draw in [lo, hi], inclusive.
  long draw(long lo, long hi) {
    assert(hi >= lo);
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<long>(eng_() % span);
  }

  bool chance(long num, long den) { return draw(1, den) <= num; }

 private:
  std::mt19937_64 eng_;
};

// Random arc endpoints, never a self-loop.
inline std::pair<int, int> draw_arc_ends(Rng& rng, int n) {
  const int tail = static_cast<int>(rng.draw(0, n - 1));
  int head = static_cast<int>(rng.draw(0, n - 2));
  if (head >= tail) ++head;
  return {tail, head};
}

// Concave piecewise-linear gain: 1..3 segments with strictly decreasing
// positive slopes over a common small denominator, integer breakpoints.
inline GainSpec draw_pwl(Rng& rng, long& x_last) {
  const int segs = static_cast<int>(rng.draw(1, 3));
  // Distinct slope numerators, descending.
  std::vector<long> nums;
  long hi = 8;
  for (int s = 0; s < segs; ++s) {
    const long lo = segs - s;  // leave room for the remaining draws
    const long v = rng.draw(lo, hi);
    nums.push_back(v);
    hi = v - 1;
  }
  const long den = rng.draw(1, 4);
  std::vector<Rational> px{Rational(0)}, py{Rational(0)};
  for (int s = 0; s < segs; ++s) {
    const long dx = rng.draw(1, 3);
    px.push_back(px.back() + Rational(dx));
    py.push_back(Rational(py.back() + Rational(nums[s], den) * dx));
  }
  x_last = static_cast<long>(px.back().get_num().get_si());
  return GainSpec::pwl(std::move(px), std::move(py));
}

}  // namespace detail

// All-linear network: n in 2..8, m in 1..20, every magnitude at most 8,
// integer demands/bounds/weights, rational gain factors p/q with p,q <= 8.
inline Network gen_linear(std::uint64_t seed) {
  detail::Rng rng(seed);
  const int n = static_cast<int>(rng.draw(2, 8));
  const int m = static_cast<int>(rng.draw(1, 20));
  Network net;
  for (int i = 0; i < n; ++i)
    net.add_node(Rational(rng.draw(-8, 8)), Integer(rng.draw(1, 8)));
  for (int a = 0; a < m; ++a) {
    const auto [tail, head] = detail::draw_arc_ends(rng, n);
    const Rational gamma(rng.draw(1, 8), rng.draw(1, 8));
    const long u = rng.draw(1, 8);
    const long l = rng.chance(1, 4) ? rng.draw(0, u - 1) : 0;
    net.add_arc(tail, head, Rational(l), Rational(u), GainSpec::linear(gamma));
  }
  net.validate();
  return net;
}

// Mixed-gain network: n in 2..6, m in 1..10, at least one nonlinear arc.
inline Network gen_concave(std::uint64_t seed) {
  detail::Rng rng(seed);
  const int n = static_cast<int>(rng.draw(2, 6));
  const int m = static_cast<int>(rng.draw(1, 10));
  Network net;
  for (int i = 0; i < n; ++i)
    net.add_node(Rational(rng.draw(-6, 6)), Integer(rng.draw(1, 8)));
  int nonlinear = 0;
  for (int a = 0; a < m; ++a) {
    const auto [tail, head] = detail::draw_arc_ends(rng, n);
    int kind = static_cast<int>(rng.draw(0, 3));
    if (a == m - 1 && nonlinear == 0)
      kind = static_cast<int>(rng.draw(1, 3));  // force one nonlinear arc
    long l = 0, u = 0;
    GainSpec gain;
    switch (kind) {
      case 0:
        gain = GainSpec::linear(Rational(rng.draw(1, 8), rng.draw(1, 8)));
        u = rng.draw(1, 8);
        if (rng.chance(1, 4)) l = rng.draw(0, u - 1);
        break;
      case 1:
        // Logarithmic gains are -infinity at zero; keep the flow range away
        // from it with a positive lower bound.
        gain = GainSpec::log(Rational(rng.draw(1, 4)));
        u = rng.draw(2, 8);
        l = rng.draw(1, u - 1);
        ++nonlinear;
        break;
      case 2: {
        static const std::pair<int, int> exps[] = {{1, 2}, {1, 3}, {2, 3}};
        const auto [pn, pd] = exps[rng.draw(0, 2)];
        gain = GainSpec::pow(Rational(rng.draw(1, 4)), Rational(pn, pd));
        u = rng.draw(1, 8);
        ++nonlinear;
        break;
      }
      default: {
        long x_last = 0;
        gain = detail::draw_pwl(rng, x_last);
        u = rng.draw(1, x_last);
        ++nonlinear;
        break;
      }
    }
    net.add_arc(tail, head, Rational(l), Rational(u), std::move(gain));
  }
  net.validate();
  return net;
}

// Bargaining market: 1..4 buyers and goods, utilities in 0..5 (rows and
// columns patched to keep every buyer interested and every good wanted),
// budgets in 1..5, small disagreement utilities.  When `force_infeasible`
// is set, buyer 0's disagreement is pushed to (or past) the utility it could
// reach even owning every good it values, so no individually rational
// allocation exists.
inline MarketInstance gen_adnb(std::uint64_t seed, bool force_infeasible) {
  detail::Rng rng(seed);
  const int nb = static_cast<int>(rng.draw(1, 4));
  const int ng = static_cast<int>(rng.draw(1, 4));
  std::vector<std::vector<long>> util(nb, std::vector<long>(ng, 0));
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < ng; ++j) util[i][j] = rng.draw(0, 5);
  for (int i = 0; i < nb; ++i) {
    bool any = false;
    for (int j = 0; j < ng; ++j) any = any || util[i][j] > 0;
    if (!any) util[i][rng.draw(0, ng - 1)] = rng.draw(1, 5);
  }
  for (int j = 0; j < ng; ++j) {
    bool any = false;
    for (int i = 0; i < nb; ++i) any = any || util[i][j] > 0;
    if (!any) util[rng.draw(0, nb - 1)][j] = rng.draw(1, 5);
  }

  MarketInstance inst;
  for (int i = 0; i < nb; ++i) {
    MarketBuyer b;
    b.id = "b" + std::to_string(i + 1);
    b.budget = Integer(rng.draw(1, 5));
    b.disagreement = rng.chance(1, 3) ? Integer(rng.draw(1, 2)) : Integer(0);
    inst.buyers.push_back(std::move(b));
  }
  for (int j = 0; j < ng; ++j) inst.goods.push_back("g" + std::to_string(j + 1));
  if (force_infeasible) {
    long row = 0;
    for (int j = 0; j < ng; ++j) row += util[0][j];
    inst.buyers[0].disagreement = Integer(row + rng.draw(0, 2));
  }
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < ng; ++j)
      if (util[i][j] > 0)
        inst.pairs.push_back(MarketPair{i, j, Integer(util[i][j]), {}});
  inst.validate();
  return inst;
}

}  // namespace genflow
