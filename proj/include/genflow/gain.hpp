// SPDX-License-Identifier: MIT
//
// Arc gain functions.
//
// Every arc carries a strictly increasing concave gain Γ with Γ(0) = 0
// after normalization: α units entering the arc's tail leave Γ(α) at its
// head.  Built-in families:
//
//   lin γ        Γ(α) = γ·α                       (γ > 0)
//   pwl k x y…   piecewise-linear through k breakpoints
//   log c        Γ(α) = c·ln(α)                   (c > 0)
//   pow c p      Γ(α) = c·α^p                     (c > 0, 0 < p < 1)
//
// A "log" gain at lower bound 0 takes value −∞ at 0 ("immense" arc); the
// solvers treat that boundary through the value/inverse conventions below
// and never step such an arc to zero flow.  Shifted evaluation (after a
// lower bound ℓ > 0 is folded away) is represented symbolically so exact
// data stays exact: Γ̃(α) = Γ(α+s) − Γ(s).

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "genflow/rational.hpp"

namespace genflow {

enum class GainKind { Linear, Pwl, Log, Pow, Custom };

inline const char* gain_kind_name(GainKind k) {
  switch (k) {
    case GainKind::Linear: return "lin";
    case GainKind::Pwl: return "pwl";
    case GainKind::Log: return "log";
    case GainKind::Pow: return "pow";
    case GainKind::Custom: return "custom";
  }
  return "?";
}

// Callbacks for a user-registered gain family, one registry per scalar type.
// `inverse` must invert `value` on the registered domain; `deriv` (right
// derivative) is optional and only consulted by diagnostic checks.
template <class R>
struct CustomGain {
  std::function<R(R)> value;
  std::function<R(R)> inverse;
  std::function<R(R)> deriv;  // may be empty
  bool immense = false;       // value(0) = −∞
};

template <class R>
class CustomGainRegistry {
 public:
  static CustomGainRegistry& instance() {
    static CustomGainRegistry reg;
    return reg;
  }
  int add(CustomGain<R> g) {
    int id = next_id_++;
    table_.emplace(id, std::move(g));
    return id;
  }
  const CustomGain<R>& get(int id) const {
    auto it = table_.find(id);
    if (it == table_.end())
      throw invariant_error("custom gain id " + std::to_string(id) +
                            " not registered for this scalar type");
    return it->second;
  }

 private:
  std::map<int, CustomGain<R>> table_;
  int next_id_ = 1;
};

// --------------------------------------------------------------------------
// GainSpec: the exact, serializable description of one arc's gain.
// --------------------------------------------------------------------------

struct GainSpec {
  GainKind kind = GainKind::Linear;

  // Linear.
  Rational gamma = 1;

  // Piecewise linear: breakpoints (x_k, y_k), x strictly increasing,
  // x.front() == 0 after load validation.
  std::vector<Rational> px, py;

  // Log / Pow coefficients.
  Rational c = 1;
  Rational p = Rational(1, 2);

  // Shift folded in by normalization: evaluate Γ_base(α + shift) − Γ_base(shift).
  // Always 0 for Linear/Pwl (their shifts are rebased exactly instead).
  Rational shift = 0;

  int custom_id = 0;

  static GainSpec linear(Rational g) {
    GainSpec s;
    s.kind = GainKind::Linear;
    g.canonicalize();  // callers may build mpq values from (num, den) pairs
    s.gamma = std::move(g);
    return s;
  }
  static GainSpec log(Rational c_) {
    GainSpec s;
    s.kind = GainKind::Log;
    c_.canonicalize();
    s.c = std::move(c_);
    return s;
  }
  static GainSpec pow(Rational c_, Rational p_) {
    GainSpec s;
    s.kind = GainKind::Pow;
    c_.canonicalize();
    p_.canonicalize();
    s.c = std::move(c_);
    s.p = std::move(p_);
    return s;
  }
  static GainSpec pwl(std::vector<Rational> x, std::vector<Rational> y) {
    GainSpec s;
    s.kind = GainKind::Pwl;
    for (Rational& v : x) v.canonicalize();
    for (Rational& v : y) v.canonicalize();
    s.px = std::move(x);
    s.py = std::move(y);
    return s;
  }
  static GainSpec custom(int id, bool /*immense*/ = false) {
    GainSpec s;
    s.kind = GainKind::Custom;
    s.custom_id = id;
    return s;
  }

  bool is_linear() const { return kind == GainKind::Linear; }

  // Γ(0) = −∞?  (log family evaluated from the 0 boundary.)
  bool immense() const {
    if (kind == GainKind::Log) return shift == 0;
    return false;
  }

  // Structural validation; returns an error message or empty string.
  // `where` is prepended to messages for file diagnostics.
  std::string validate(const std::string& where = "") const {
    auto err = [&](const std::string& m) { return where.empty() ? m : where + ": " + m; };
    switch (kind) {
      case GainKind::Linear:
        if (gamma <= 0) return err("linear gain factor must be positive");
        return "";
      case GainKind::Log:
        if (c <= 0) return err("log gain coefficient must be positive");
        return "";
      case GainKind::Pow:
        if (c <= 0) return err("pow gain coefficient must be positive");
        if (p <= 0 || p >= 1) return err("pow exponent must lie in (0,1)");
        return "";
      case GainKind::Pwl: {
        if (px.size() < 2 || px.size() != py.size())
          return err("pwl gain needs at least 2 breakpoints");
        if (px.front() != 0) return err("pwl breakpoints must start at x=0");
        for (std::size_t k = 0; k + 1 < px.size(); ++k) {
          if (px[k + 1] <= px[k])
            return err("pwl breakpoint x-values must be strictly increasing");
        }
        Rational prev_slope;
        bool have_prev = false;
        for (std::size_t k = 0; k + 1 < px.size(); ++k) {
          Rational slope = (py[k + 1] - py[k]) / (px[k + 1] - px[k]);
          const bool last = (k + 2 == px.size());
          if (slope < 0) return err("pwl gain must be nondecreasing");
          if (slope == 0 && !last)
            return err("pwl gain has an interior flat segment");
          if (have_prev && slope > prev_slope)
            return err("pwl gain must be concave (slopes nonincreasing)");
          prev_slope = slope;
          have_prev = true;
        }
        return "";
      }
      case GainKind::Custom:
        if (custom_id <= 0) return err("custom gain id missing");
        return "";
    }
    return err("unknown gain kind");
  }

  // Largest flow value below which the gain is strictly increasing; beyond
  // it the function is flat (only a trailing flat pwl segment qualifies).
  // Capacities are truncated here during normalization.
  std::optional<Rational> strict_upper() const {
    if (kind != GainKind::Pwl) return std::nullopt;
    const std::size_t k = px.size();
    if (k >= 2 && py[k - 1] == py[k - 2]) return px[k - 2];
    return std::nullopt;
  }

  // Exact evaluation; defined for Linear and Pwl only.
  Rational value_exact(const Rational& a) const {
    switch (kind) {
      case GainKind::Linear:
        return gamma * a;
      case GainKind::Pwl: {
        // Locate segment: largest k with px[k] <= a (clamped to last segment).
        std::size_t k = segment_by_x(a);
        return py[k] + (py[k + 1] - py[k]) / (px[k + 1] - px[k]) * (a - px[k]);
      }
      default:
        throw invariant_error("value_exact on a non-rational gain family");
    }
  }

  Rational inverse_exact(const Rational& b) const {
    switch (kind) {
      case GainKind::Linear:
        return b / gamma;
      case GainKind::Pwl: {
        std::size_t k = segment_by_y(b);
        Rational slope = (py[k + 1] - py[k]) / (px[k + 1] - px[k]);
        if (slope == 0)
          throw invariant_error("pwl inverse evaluated on a flat segment");
        return px[k] + (b - py[k]) / slope;
      }
      default:
        throw invariant_error("inverse_exact on a non-rational gain family");
    }
  }

  std::string to_text() const {
    std::ostringstream os;
    switch (kind) {
      case GainKind::Linear:
        os << "lin " << rational_to_string(gamma);
        break;
      case GainKind::Log:
        os << "log " << rational_to_string(c);
        if (shift != 0) os << " (shift " << rational_to_string(shift) << ")";
        break;
      case GainKind::Pow:
        os << "pow " << rational_to_string(c) << " " << rational_to_string(p);
        if (shift != 0) os << " (shift " << rational_to_string(shift) << ")";
        break;
      case GainKind::Pwl:
        os << "pwl " << px.size();
        for (std::size_t k = 0; k < px.size(); ++k)
          os << " " << rational_to_string(px[k]) << " "
             << rational_to_string(py[k]);
        break;
      case GainKind::Custom:
        os << "custom " << custom_id;
        break;
    }
    return os.str();
  }

  std::size_t segment_by_x(const Rational& a) const {
    std::size_t lo = 0, hi = px.size() - 1;  // search in [0, k-2]
    while (lo + 1 < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (px[mid] <= a) lo = mid; else hi = mid;
    }
    return lo;
  }
  std::size_t segment_by_y(const Rational& b) const {
    std::size_t lo = 0, hi = py.size() - 1;
    while (lo + 1 < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (py[mid] <= b) lo = mid; else hi = mid;
    }
    return lo;
  }
};

// --------------------------------------------------------------------------
// GainOracle<R>: evaluate one gain (value / inverse / right derivative) in
// scalar type R.  Immense boundary conventions:
//   value(a)   = −∞ for a ≤ 0 on an immense gain
//   inverse(b) = 0  for b = −∞ on an immense gain
// --------------------------------------------------------------------------

template <class R>
class GainOracle {
 public:
  GainOracle() = default;

  explicit GainOracle(const GainSpec& spec) : spec_(spec) {
    switch (spec_.kind) {
      case GainKind::Linear:
        g_ = to_real<R>(spec_.gamma);
        break;
      case GainKind::Pwl:
        for (const auto& x : spec_.px) xb_.push_back(to_real<R>(x));
        for (const auto& y : spec_.py) yb_.push_back(to_real<R>(y));
        for (std::size_t k = 0; k + 1 < xb_.size(); ++k)
          sl_.push_back((yb_[k + 1] - yb_[k]) / (xb_[k + 1] - xb_[k]));
        break;
      case GainKind::Log:
      case GainKind::Pow:
        if constexpr (!real_traits<R>::exact) {
          c_ = to_real<R>(spec_.c);
          p_ = to_real<R>(spec_.p);
          s_ = to_real<R>(spec_.shift);
          if (spec_.kind == GainKind::Pow && spec_.shift != 0) {
            using std::pow;
            sp_ = pow(s_, p_);
          }
        }
        break;
      case GainKind::Custom:
        custom_ = &CustomGainRegistry<R>::instance().get(spec_.custom_id);
        break;
    }
  }

  const GainSpec& spec() const { return spec_; }
  bool immense() const {
    if (spec_.kind == GainKind::Custom) return custom_->immense;
    return spec_.immense();
  }

  bool has_deriv() const {
    return spec_.kind != GainKind::Custom ||
           static_cast<bool>(custom_->deriv);
  }

  // Γ(a).
  R value(const R& a) const {
    switch (spec_.kind) {
      case GainKind::Linear:
        return g_ * a;
      case GainKind::Pwl: {
        std::size_t k = segment_by_x(a);
        return yb_[k] + sl_[k] * (a - xb_[k]);
      }
      case GainKind::Log: {
        if constexpr (real_traits<R>::exact) {
          throw invariant_error("exact evaluation of a log gain");
        } else {
          using std::log;
          using std::log1p;
          if (spec_.shift == 0) {
            if (a <= 0) return -real_traits<R>::infinity();
            return c_ * log(a);
          }
          // c·ln(a+s) − c·ln(s), computed as c·log1p(a/s) for accuracy.
          return c_ * log1p(a / s_);
        }
      }
      case GainKind::Pow: {
        if constexpr (real_traits<R>::exact) {
          throw invariant_error("exact evaluation of a pow gain");
        } else {
          using std::pow;
          if (spec_.shift == 0) {
            if (a <= 0) return R(0);
            return c_ * pow(a, p_);
          }
          return c_ * (pow(a + s_, p_) - sp_);
        }
      }
      case GainKind::Custom:
        return custom_->value(a);
    }
    throw invariant_error("unreachable gain kind");
  }

  // Γ⁻¹(b).
  R inverse(const R& b) const {
    switch (spec_.kind) {
      case GainKind::Linear:
        return b / g_;
      case GainKind::Pwl: {
        std::size_t k = segment_by_y(b);
        if (sl_[k] == R(0))
          throw invariant_error("pwl inverse evaluated on a flat segment");
        return xb_[k] + (b - yb_[k]) / sl_[k];
      }
      case GainKind::Log: {
        if constexpr (real_traits<R>::exact) {
          throw invariant_error("exact evaluation of a log gain");
        } else {
          using std::exp;
          using std::expm1;
          if (spec_.shift == 0) {
            if (!real_traits<R>::is_finite(b) && b < R(0)) return R(0);
            return exp(b / c_);
          }
          return s_ * expm1(b / c_);
        }
      }
      case GainKind::Pow: {
        if constexpr (real_traits<R>::exact) {
          throw invariant_error("exact evaluation of a pow gain");
        } else {
          using std::pow;
          if (spec_.shift == 0) {
            if (b <= 0) return R(0);
            return pow(b / c_, R(1) / p_);
          }
          return pow(b / c_ + sp_, R(1) / p_) - s_;
        }
      }
      case GainKind::Custom:
        return custom_->inverse(b);
    }
    throw invariant_error("unreachable gain kind");
  }

  // Γ⁻¹(Γ(f) + dy) − f for dy ≥ 0: the flow increase that raises the gain
  // image by dy.  Computed per family so the result is accurate relative to
  // the *increment*; the naive difference of two point evaluations cancels
  // catastrophically once dy is small against Γ(f), and downstream tightness
  // checks compare exactly such increments.
  R inverse_increment(const R& f, const R& dy) const {
    switch (spec_.kind) {
      case GainKind::Linear:
        return dy / g_;
      case GainKind::Pwl: {
        std::size_t k = segment_by_x(f);
        R x = f, rem = dy, res(0);
        for (;;) {
          const bool last = k + 1 >= sl_.size();
          const R yroom = last ? R(0) : R(sl_[k] * (xb_[k + 1] - x));
          if (last || rem <= yroom) {
            if (sl_[k] == R(0))
              throw invariant_error("pwl inverse ran onto a flat segment");
            res += rem / sl_[k];
            return res;
          }
          rem -= yroom;
          res += xb_[k + 1] - x;
          x = xb_[k + 1];
          ++k;
        }
      }
      case GainKind::Log: {
        if constexpr (real_traits<R>::exact) {
          throw invariant_error("exact evaluation of a log gain");
        } else {
          using std::expm1;
          // Γ⁻¹ scales multiplicatively: f' + s = (f + s)·e^{dy/c}.
          if (spec_.shift == 0 && !(f > R(0))) return R(0);  // -inf boundary
          return (f + s_) * expm1(dy / c_);
        }
      }
      case GainKind::Pow: {
        if constexpr (real_traits<R>::exact) {
          throw invariant_error("exact evaluation of a pow gain");
        } else {
          using std::expm1;
          using std::log1p;
          using std::pow;
          const R base = f + s_;
          if (!(base > R(0))) return pow(dy / c_, R(1) / p_) - s_;
          // f' + s = (f+s)·(1 + dy/(c (f+s)^p))^{1/p}
          const R t = dy / (c_ * pow(base, p_));
          return base * expm1(log1p(t) / p_);
        }
      }
      case GainKind::Custom:
        // No structural form available; accuracy degrades for tiny dy.
        return custom_->inverse(custom_->value(f) + dy) - f;
    }
    throw invariant_error("unreachable gain kind");
  }

  // Γ(f) − Γ(f − dx) for 0 ≤ dx ≤ f: the gain-image drop from pulling dx
  // flow back.  Same accuracy contract as inverse_increment.
  R value_decrement(const R& f, const R& dx) const {
    switch (spec_.kind) {
      case GainKind::Linear:
        return g_ * dx;
      case GainKind::Pwl: {
        std::size_t k = segment_by_x(f);
        R x = f, rem = dx, res(0);
        for (;;) {
          const R xroom = x - xb_[k];
          if (rem <= xroom || k == 0) {
            res += sl_[k] * rem;
            return res;
          }
          rem -= xroom;
          res += sl_[k] * xroom;
          x = xb_[k];
          --k;
        }
      }
      case GainKind::Log: {
        if constexpr (real_traits<R>::exact) {
          throw invariant_error("exact evaluation of a log gain");
        } else {
          using std::log1p;
          const R base = f + s_;
          if (!(dx < base)) return real_traits<R>::infinity();
          return -c_ * log1p(-dx / base);
        }
      }
      case GainKind::Pow: {
        if constexpr (real_traits<R>::exact) {
          throw invariant_error("exact evaluation of a pow gain");
        } else {
          using std::expm1;
          using std::log1p;
          using std::pow;
          const R base = f + s_;
          if (!(dx < base)) return value(f) - value(f - dx);
          return -c_ * pow(base, p_) * expm1(p_ * log1p(-dx / base));
        }
      }
      case GainKind::Custom:
        return custom_->value(f) - custom_->value(f - dx);
    }
    throw invariant_error("unreachable gain kind");
  }

  // Left derivative Γ'(a⁻); differs from the right one only at pwl
  // breakpoints.  Used by diagnostic checkers only.
  R left_deriv(const R& a) const {
    if (spec_.kind == GainKind::Pwl) {
      // Slope of the segment ending at a: the segment with x_k < a ≤ x_{k+1}.
      std::size_t k = segment_by_x(a);
      if (k > 0 && a <= xb_[k]) --k;
      return sl_[k];
    }
    return right_deriv(a);
  }

  // Right derivative Γ'(a⁺); used by diagnostic checkers only.
  R right_deriv(const R& a) const {
    switch (spec_.kind) {
      case GainKind::Linear:
        return g_;
      case GainKind::Pwl: {
        // At a breakpoint the right derivative is the next segment's slope.
        std::size_t k = segment_by_x(a);
        if (k + 1 < sl_.size() && a >= xb_[k + 1]) ++k;
        return sl_[k];
      }
      case GainKind::Log: {
        if constexpr (real_traits<R>::exact) {
          throw invariant_error("exact evaluation of a log gain");
        } else {
          if (spec_.shift == 0 && a <= 0) return real_traits<R>::infinity();
          return c_ / (a + s_);
        }
      }
      case GainKind::Pow: {
        if constexpr (real_traits<R>::exact) {
          throw invariant_error("exact evaluation of a pow gain");
        } else {
          using std::pow;
          if (a + s_ <= 0) return real_traits<R>::infinity();
          return c_ * p_ * pow(a + s_, p_ - R(1));
        }
      }
      case GainKind::Custom:
        if (!custom_->deriv)
          throw invariant_error("custom gain has no derivative callback");
        return custom_->deriv(a);
    }
    throw invariant_error("unreachable gain kind");
  }

 private:
  std::size_t segment_by_x(const R& a) const {
    std::size_t lo = 0, hi = xb_.size() - 1;
    while (lo + 1 < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (xb_[mid] <= a) lo = mid; else hi = mid;
    }
    return lo;
  }
  std::size_t segment_by_y(const R& b) const {
    std::size_t lo = 0, hi = yb_.size() - 1;
    while (lo + 1 < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (yb_[mid] <= b) lo = mid; else hi = mid;
    }
    return lo;
  }

  GainSpec spec_;
  R g_{};                      // linear
  std::vector<R> xb_, yb_, sl_;  // pwl
  R c_{}, p_{}, s_{}, sp_{};   // log/pow (+shift)
  const CustomGain<R>* custom_ = nullptr;
};

// View of the reversed gain: traversing an arc against its orientation maps
// a (negative) amount α at the original head to −Γ⁻¹(−α) at the original
// tail.  backward(backward(Γ)) equals Γ pointwise.
template <class R>
struct BackwardGain {
  const GainOracle<R>* fwd;

  R value(const R& a) const { return -fwd->inverse(-a); }
  R inverse(const R& b) const { return -fwd->value(-b); }
};

template <class R>
inline BackwardGain<R> backward(const GainOracle<R>& g) {
  return BackwardGain<R>{&g};
}

// --------------------------------------------------------------------------
// Randomized validation of a gain oracle on (0, u]: strict monotonicity,
// concavity, and value/inverse round-trip within tolerance.  Used when
// registering custom gains, and in tests against the built-in families.
// --------------------------------------------------------------------------

template <class R>
inline std::vector<std::string> validate_gain(
    const GainOracle<R>& g, const R& u, int samples = 1000,
    double tol = 1e-9, std::uint64_t seed = 20260818) {
  std::vector<std::string> bad;
  if (!(u > R(0))) {
    bad.push_back("empty domain: u <= 0");
    return bad;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<R> xs;
  xs.reserve(samples);
  for (int i = 0; i < samples; ++i) {
    double t = unif(rng);
    if (t <= 0.0) t = 0.5;
    xs.push_back(u * R(t));
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  const R tau = R(tol);
  auto scale = [&](const R& x) {
    using std::abs;
    R ax = abs(x);
    return ax > R(1) ? ax : R(1);
  };

  for (std::size_t i = 0; i + 1 < xs.size() && bad.size() < 8; ++i) {
    R v0 = g.value(xs[i]), v1 = g.value(xs[i + 1]);
    if (!(v1 > v0))
      bad.push_back("not strictly increasing near x=" +
                    double_to_string(real_to_double<R>(xs[i])));
    // Concavity: value at midpoint at least the chord midpoint.
    R mid = (xs[i] + xs[i + 1]) / R(2);
    R vm = g.value(mid);
    if (vm + tau * scale(vm) < (v0 + v1) / R(2))
      bad.push_back("not concave near x=" +
                    double_to_string(real_to_double<R>(mid)));
  }
  for (std::size_t i = 0; i < xs.size() && bad.size() < 8; ++i) {
    R v = g.value(xs[i]);
    if (!real_traits<R>::is_finite(v)) continue;
    R back = g.inverse(v);
    using std::abs;
    if (abs(back - xs[i]) > tau * scale(xs[i]))
      bad.push_back("inverse round-trip off at x=" +
                    double_to_string(real_to_double<R>(xs[i])));
  }
  return bad;
}

// Registers a custom gain after validating it on (0, u]; throws input_error
// listing the first violation if validation fails.
template <class R>
inline int register_custom_gain(CustomGain<R> g, const R& domain_upper,
                                int samples = 1000, double tol = 1e-9) {
  GainSpec probe = GainSpec::custom(0);
  // Validate through a temporary registration so the oracle machinery is
  // exercised exactly as it will be used.
  int id = CustomGainRegistry<R>::instance().add(std::move(g));
  probe.custom_id = id;
  GainOracle<R> oracle(probe);
  auto bad = validate_gain(oracle, domain_upper, samples, tol);
  if (!bad.empty())
    throw input_error("custom gain rejected: " + bad.front());
  return id;
}

}  // namespace genflow
