// SPDX-License-Identifier: MIT
//
// Exact rational arithmetic helpers shared across the library.
//
// Exact computations run on GMP rationals (mpq_class).  Floating-point
// computations are templated on a scalar R (double, or a boost
// multiprecision float for high-accuracy runs); this header provides the
// conversions and the small trait surface the solvers need from R.

#pragma once

#include <gmpxx.h>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

namespace genflow {

using Rational = mpq_class;
using Integer = mpz_class;

// Thrown for malformed input files / CLI arguments (CLI exit code 2).
class input_error : public std::runtime_error {
 public:
  explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a solver detects violation of one of its internal invariants
// (CLI exit code 3).  These indicate a bug or numeric breakdown, never bad
// user input.
class invariant_error : public std::logic_error {
 public:
  explicit invariant_error(const std::string& what) : std::logic_error(what) {}
};

// --------------------------------------------------------------------------
// Parsing and formatting.
// --------------------------------------------------------------------------

// Parses "p" or "p/q" (optionally signed) into an exact rational.
// Returns false on malformed text or a zero denominator.
inline bool try_parse_rational(std::string_view text, Rational& out) {
  if (text.empty()) return false;
  auto is_int = [](std::string_view s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
      if (s[i] < '0' || s[i] > '9') return false;
    return true;
  };
  const std::size_t slash = text.find('/');
  try {
    if (slash == std::string_view::npos) {
      if (!is_int(text)) return false;
      out = Rational(std::string(text));
    } else {
      std::string_view num = text.substr(0, slash);
      std::string_view den = text.substr(slash + 1);
      if (!is_int(num) || !is_int(den)) return false;
      Integer n{std::string(num)};
      Integer d{std::string(den)};
      if (d == 0) return false;
      out = Rational(n) / Rational(d);
    }
  } catch (const std::invalid_argument&) {
    return false;
  }
  out.canonicalize();
  return true;
}

inline Rational parse_rational(std::string_view text,
                               const std::string& context = "") {
  Rational q;
  if (!try_parse_rational(text, q)) {
    throw input_error(context.empty()
                          ? "malformed rational '" + std::string(text) + "'"
                          : context + ": malformed rational '" +
                                std::string(text) + "'");
  }
  return q;
}

// "p" when the denominator is 1, "p/q" otherwise.
inline std::string rational_to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

// Shortest decimal round-trip representation, for deterministic reports.
inline std::string double_to_string(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

// --------------------------------------------------------------------------
// Integer / rational utilities.
// --------------------------------------------------------------------------

inline Integer int_pow(const Integer& base, unsigned long exp) {
  Integer r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), exp);
  return r;
}

inline Integer floor_to_int(const Rational& q) {
  Integer r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
  return r;
}

inline Integer ceil_to_int(const Rational& q) {
  Integer r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
  return r;
}

inline Integer lcm(const Integer& a, const Integer& b) {
  Integer r;
  mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

// Exact rational equal to the given (finite) double.
inline Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite double");
  Rational q;
  mpq_set_d(q.get_mpq_t(), x);
  return q;
}

// --------------------------------------------------------------------------
// Scalar conversions.
// --------------------------------------------------------------------------

template <class R>
inline R to_real(const Rational& q) {
  if constexpr (std::is_same_v<R, Rational>) {
    return q;
  } else if constexpr (std::is_same_v<R, double>) {
    return q.get_d();
  } else {
    // Multiprecision floats construct exactly from decimal integer strings.
    R n(q.get_num().get_str());
    R d(q.get_den().get_str());
    return n / d;
  }
}

template <class R>
inline R to_real(const Integer& z) {
  if constexpr (std::is_same_v<R, Rational>) {
    return Rational(z);
  } else if constexpr (std::is_same_v<R, double>) {
    return mpz_get_d(z.get_mpz_t());
  } else {
    return R(z.get_str());
  }
}

template <class R>
inline double real_to_double(const R& x) {
  if constexpr (std::is_same_v<R, Rational>) {
    return x.get_d();
  } else {
    return static_cast<double>(x);
  }
}

// Trait surface used by the templated solvers.
template <class R>
struct real_traits {
  static constexpr bool exact = false;
  static R infinity() { return std::numeric_limits<R>::infinity(); }
  static R epsilon() { return std::numeric_limits<R>::epsilon(); }
  static bool is_finite(const R& x) {
    using std::isfinite;
    return isfinite(x);
  }
};

template <>
struct real_traits<Rational> {
  static constexpr bool exact = true;
  // Exact mode never manufactures infinities; extended values are handled
  // by Ext<R> below.
  static bool is_finite(const Rational&) { return true; }
};

// --------------------------------------------------------------------------
// Extended scalar: a value or +infinity.
//
// Dijkstra keys and node labels need a clean +inf even in exact rational
// mode, where the scalar type has no native infinity.
// --------------------------------------------------------------------------

template <class R>
struct Ext {
  R value{};
  bool inf = false;

  Ext() = default;
  explicit Ext(R v) : value(std::move(v)), inf(false) {}
  static Ext infinity() {
    Ext e;
    e.inf = true;
    return e;
  }

  bool is_inf() const { return inf; }
  const R& get() const {
    if (inf) throw invariant_error("Ext: dereferenced infinity");
    return value;
  }

  friend bool operator<(const Ext& a, const Ext& b) {
    if (a.inf) return false;
    if (b.inf) return true;
    return a.value < b.value;
  }
  friend bool operator>(const Ext& a, const Ext& b) { return b < a; }
  friend bool operator<=(const Ext& a, const Ext& b) { return !(b < a); }
  friend bool operator>=(const Ext& a, const Ext& b) { return !(a < b); }
  friend bool operator==(const Ext& a, const Ext& b) {
    if (a.inf || b.inf) return a.inf && b.inf;
    return a.value == b.value;
  }
};

}  // namespace genflow
