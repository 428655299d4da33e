// SPDX-License-Identifier: MIT
//
// Exact bounded-variable primal simplex over GMP rationals.
//
// Minimizes c·x subject to Ax = rhs and lower ≤ x ≤ upper (upper bounds may
// be infinite).  The caller supplies a starting basis that is feasible when
// every nonbasic variable sits at its finite lower/upper bound; the library
// only builds LPs where such a basis is immediate, so there is no phase-1.
// Pivoting uses Bland's rule throughout: with exact arithmetic that makes
// termination unconditional, and speed is not the point of this component —
// it exists to certify the scaling solvers.

#pragma once

#include <vector>

#include "genflow/rational.hpp"

namespace genflow {

class BoundedSimplex {
 public:
  int add_var(Rational cost, Rational lower, Ext<Rational> upper) {
    cost_.push_back(std::move(cost));
    lo_.push_back(std::move(lower));
    hi_.push_back(std::move(upper));
    cols_.emplace_back();
    return static_cast<int>(cost_.size()) - 1;
  }

  int add_constraint(Rational rhs) {
    rhs_.push_back(std::move(rhs));
    return static_cast<int>(rhs_.size()) - 1;
  }

  void set_coeff(int row, int col, Rational v) {
    if (v == 0) return;
    cols_[col].emplace_back(row, std::move(v));
  }

  struct Result {
    bool optimal = false;   // false: unbounded (cannot happen for our LPs)
    Rational objective;
    std::vector<Rational> x;
  };

  // initial_basis[row] = column of the starting basic variable for `row`.
  Result solve(const std::vector<int>& initial_basis) {
    const int r = static_cast<int>(rhs_.size());
    const int ncols = static_cast<int>(cost_.size());
    basis_ = initial_basis;
    if (static_cast<int>(basis_.size()) != r)
      throw invariant_error("simplex: basis size mismatch");

    // Nonbasic variables start at their lower bound.
    at_upper_.assign(ncols, false);
    in_basis_.assign(ncols, false);
    for (int row = 0; row < r; ++row) in_basis_[basis_[row]] = true;

    build_inverse();
    compute_basic_values();
    for (int row = 0; row < r; ++row) {
      if (!within_bounds(basis_[row], xb_[row]))
        throw invariant_error("simplex: initial basis infeasible");
    }

    const long max_iters = 2'000'000;
    for (long iter = 0; iter < max_iters; ++iter) {
      // Pricing: y = (B^-1)^T c_B, reduced cost d_j = c_j − y·A_j.
      std::vector<Rational> y(r, Rational(0));
      for (int row = 0; row < r; ++row) {
        const Rational& cb = cost_[basis_[row]];
        if (cb == 0) continue;
        for (int k = 0; k < r; ++k) y[k] += cb * binv_[row][k];
      }
      int enter = -1;
      bool enter_increases = true;
      for (int j = 0; j < ncols; ++j) {  // Bland: lowest eligible index
        if (in_basis_[j]) continue;
        Rational d = cost_[j];
        for (const auto& [row, v] : cols_[j]) d -= y[row] * v;
        if (!at_upper_[j] && d < 0) {
          enter = j;
          enter_increases = true;
          break;
        }
        if (at_upper_[j] && d > 0) {
          enter = j;
          enter_increases = false;
          break;
        }
      }
      if (enter < 0) return finish();

      // Direction: basic values move by −σ·t·w with w = B^-1 A_enter.
      std::vector<Rational> w(r, Rational(0));
      for (const auto& [row, v] : cols_[enter])
        for (int k = 0; k < r; ++k) w[k] += binv_[k][row] * v;
      const int sigma = enter_increases ? 1 : -1;

      // Ratio test: largest step t ≥ 0 keeping everything in range.
      // Ties break on the smallest leaving-variable index (Bland), with the
      // entering variable's own bound-to-bound move competing under its own
      // index.
      bool bounded = false;
      Rational tmax;
      int leave_row = -1;       // −1: entering variable hits its own bound
      int leave_var = -1;
      bool leave_to_upper = false;
      auto consider = [&](const Rational& limit, int var, int row,
                          bool to_upper) {
        if (!bounded || limit < tmax || (limit == tmax && var < leave_var)) {
          bounded = true;
          tmax = limit;
          leave_var = var;
          leave_row = row;
          leave_to_upper = to_upper;
        }
      };
      if (!hi_[enter].is_inf())
        consider(hi_[enter].get() - lo_[enter], enter, -1, false);
      for (int row = 0; row < r; ++row) {
        if (w[row] == 0) continue;
        // x_B[row] moves at rate −σ·w[row].
        const Rational rate = -Rational(sigma) * w[row];
        const int bj = basis_[row];
        if (rate > 0 && !hi_[bj].is_inf())
          consider((hi_[bj].get() - xb_[row]) / rate, bj, row, true);
        else if (rate < 0)
          consider((lo_[bj] - xb_[row]) / rate, bj, row, false);
      }
      if (!bounded) {
        Result res;
        res.optimal = false;
        return res;
      }

      apply_step(enter, enter_increases, tmax, w, leave_row, leave_to_upper);
    }
    throw invariant_error("simplex: iteration limit exceeded");
  }

  // Value of variable j in the solved state (used by finish()).
  const std::vector<Rational>& rhs() const { return rhs_; }

 private:
  bool within_bounds(int j, const Rational& v) const {
    if (v < lo_[j]) return false;
    if (!hi_[j].is_inf() && v > hi_[j].get()) return false;
    return true;
  }

  void build_inverse() {
    const int r = static_cast<int>(rhs_.size());
    std::vector<std::vector<Rational>> m(r, std::vector<Rational>(2 * r, Rational(0)));
    for (int row = 0; row < r; ++row) m[row][r + row] = 1;
    for (int col = 0; col < r; ++col)
      for (const auto& [row, v] : cols_[basis_[col]]) m[row][col] = v;
    // Gauss-Jordan.
    for (int piv = 0; piv < r; ++piv) {
      int prow = -1;
      for (int row = piv; row < r; ++row)
        if (m[row][piv] != 0) {
          prow = row;
          break;
        }
      if (prow < 0) throw invariant_error("simplex: singular basis");
      std::swap(m[piv], m[prow]);
      const Rational inv = 1 / m[piv][piv];
      for (int k = piv; k < 2 * r; ++k) m[piv][k] *= inv;
      for (int row = 0; row < r; ++row) {
        if (row == piv || m[row][piv] == 0) continue;
        const Rational factor = m[row][piv];
        for (int k = piv; k < 2 * r; ++k) m[row][k] -= factor * m[piv][k];
      }
    }
    binv_.assign(r, std::vector<Rational>(r));
    for (int row = 0; row < r; ++row)
      for (int k = 0; k < r; ++k) binv_[row][k] = m[row][r + k];
  }

  Rational nonbasic_value(int j) const {
    return at_upper_[j] ? hi_[j].get() : lo_[j];
  }

  void compute_basic_values() {
    const int r = static_cast<int>(rhs_.size());
    std::vector<Rational> adj = rhs_;
    const int ncols = static_cast<int>(cost_.size());
    for (int j = 0; j < ncols; ++j) {
      if (in_basis_[j]) continue;
      const Rational xj = nonbasic_value(j);
      if (xj == 0) continue;
      for (const auto& [row, v] : cols_[j]) adj[row] -= v * xj;
    }
    xb_.assign(r, Rational(0));
    for (int row = 0; row < r; ++row)
      for (int k = 0; k < r; ++k) xb_[row] += binv_[row][k] * adj[k];
  }

  void apply_step(int enter, bool increases, const Rational& t,
                  const std::vector<Rational>& w, int leave_row,
                  bool leave_to_upper) {
    const int r = static_cast<int>(rhs_.size());
    const int sigma = increases ? 1 : -1;
    for (int row = 0; row < r; ++row)
      xb_[row] -= Rational(sigma) * t * w[row];
    const Rational enter_val = increases ? Rational(lo_[enter] + t)
                                         : Rational(hi_[enter].get() - t);

    if (leave_row < 0) {
      // Bound-to-bound move; basis unchanged.
      at_upper_[enter] = increases;
      return;
    }
    const int leave = basis_[leave_row];
    in_basis_[leave] = false;
    at_upper_[leave] = leave_to_upper;
    in_basis_[enter] = true;
    basis_[leave_row] = enter;
    xb_[leave_row] = enter_val;

    // Eta update of the explicit inverse.
    const Rational piv = w[leave_row];
    if (piv == 0) throw invariant_error("simplex: zero pivot");
    for (int k = 0; k < r; ++k) binv_[leave_row][k] /= piv;
    for (int row = 0; row < r; ++row) {
      if (row == leave_row || w[row] == 0) continue;
      const Rational factor = w[row];
      for (int k = 0; k < r; ++k)
        binv_[row][k] -= factor * binv_[leave_row][k];
    }
  }

  Result finish() const {
    const int ncols = static_cast<int>(cost_.size());
    Result res;
    res.optimal = true;
    res.x.assign(ncols, Rational(0));
    for (int j = 0; j < ncols; ++j)
      if (!in_basis_[j]) res.x[j] = nonbasic_value(j);
    for (std::size_t row = 0; row < basis_.size(); ++row)
      res.x[basis_[row]] = xb_[row];
    res.objective = 0;
    for (int j = 0; j < ncols; ++j)
      if (cost_[j] != 0) res.objective += cost_[j] * res.x[j];
    return res;
  }

  std::vector<Rational> cost_, lo_, rhs_;
  std::vector<Ext<Rational>> hi_;
  std::vector<std::vector<std::pair<int, Rational>>> cols_;

  std::vector<int> basis_;
  std::vector<bool> at_upper_, in_basis_;
  std::vector<std::vector<Rational>> binv_;
  std::vector<Rational> xb_;
};

}  // namespace genflow
