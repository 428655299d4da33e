// SPDX-License-Identifier: MIT
//
// Network model and the .cgf text format.
//
// A network is a directed multigraph; node i carries a demand b_i (negative
// = supply) and an integer penalty weight M_i ≥ 1, arc a carries bounds
// ℓ_a ≤ f_a ≤ u_a and a gain function.  `normalize` rewrites an instance to
// an equivalent one with ℓ ≡ 0, Γ(0) = 0 on every arc and capacities
// truncated where a gain goes flat; flows map back via a per-arc shift.
//
// File format (line oriented; 'c' lines are comments):
//   p cgf <n> <m>
//   n <id> <b> <M>            (1-based id; omitted nodes get b=0, M=1)
//   a <tail> <head> <l> <u> <gain>
// where <gain> is one of:
//   lin <γ> | pwl <k> <x1> <y1> … <xk> <yk> | log <c> | pow <c> <p>
// and all numbers are integers or rationals "p/q".

#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "genflow/gain.hpp"
#include "genflow/rational.hpp"

namespace genflow {

struct Arc {
  int tail = 0;
  int head = 0;
  Rational lower = 0;
  Rational upper = 0;
  GainSpec gain;
};

struct Network {
  std::vector<Rational> b;  // node demands
  std::vector<Integer> M;   // node penalty weights
  std::vector<Arc> arcs;

  int n() const { return static_cast<int>(b.size()); }
  int m() const { return static_cast<int>(arcs.size()); }

  int add_node(Rational demand = 0, Integer weight = 1) {
    demand.canonicalize();  // tolerate mpq values built from (num, den)
    b.push_back(std::move(demand));
    M.push_back(std::move(weight));
    return n() - 1;
  }
  int add_arc(int tail, int head, Rational lower, Rational upper,
              GainSpec gain) {
    lower.canonicalize();
    upper.canonicalize();
    arcs.push_back({tail, head, std::move(lower), std::move(upper),
                    std::move(gain)});
    return m() - 1;
  }

  bool all_linear() const {
    for (const auto& a : arcs)
      if (!a.gain.is_linear()) return false;
    return true;
  }

  // Full structural validation; throws input_error on the first problem.
  void validate() const {
    if (n() < 1) throw input_error("network has no nodes");
    for (int i = 0; i < n(); ++i) {
      if (M[i] < 1)
        throw input_error("node " + std::to_string(i + 1) +
                          ": penalty weight must be a positive integer");
    }
    for (int a = 0; a < m(); ++a) {
      const Arc& e = arcs[a];
      const std::string where = "arc " + std::to_string(a + 1);
      if (e.tail < 0 || e.tail >= n() || e.head < 0 || e.head >= n())
        throw input_error(where + ": endpoint out of range");
      if (e.tail == e.head) throw input_error(where + ": self-loop");
      if (e.lower < 0) throw input_error(where + ": negative lower bound");
      if (e.lower > e.upper)
        throw input_error(where + ": lower bound exceeds capacity");
      std::string msg = e.gain.validate(where);
      if (!msg.empty()) throw input_error(msg);
      if (e.gain.kind == GainKind::Pwl && e.gain.px.back() < e.upper)
        throw input_error(where + ": pwl breakpoints do not cover [0, u]");
      if (e.gain.immense() && e.lower == 0 && e.upper == 0)
        throw input_error(where +
                          ": log gain is -infinity over the whole range");
      if (auto su = e.gain.strict_upper()) {
        if (e.lower > *su && e.lower < e.upper)
          throw input_error(where +
                            ": gain is flat over the entire feasible range");
      }
    }
  }
};

// Incidence lists; degree counts incident arcs (in + out).
struct Adjacency {
  std::vector<std::vector<int>> out, in;
  std::vector<int> degree;
};

inline Adjacency build_adjacency(const Network& net) {
  Adjacency adj;
  adj.out.resize(net.n());
  adj.in.resize(net.n());
  adj.degree.assign(net.n(), 0);
  for (int a = 0; a < net.m(); ++a) {
    adj.out[net.arcs[a].tail].push_back(a);
    adj.in[net.arcs[a].head].push_back(a);
    ++adj.degree[net.arcs[a].tail];
    ++adj.degree[net.arcs[a].head];
  }
  return adj;
}

// --------------------------------------------------------------------------
// Parsing / writing.
// --------------------------------------------------------------------------

namespace detail {
inline std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream is(line);
  std::string t;
  while (is >> t) toks.push_back(t);
  return toks;
}

inline GainSpec parse_gain_tokens(const std::vector<std::string>& toks,
                                  std::size_t pos, const std::string& where) {
  auto need = [&](std::size_t k) {
    if (toks.size() != pos + k)
      throw input_error(where + ": wrong number of gain parameters");
  };
  if (pos >= toks.size()) throw input_error(where + ": missing gain");
  const std::string& kind = toks[pos];
  if (kind == "lin") {
    need(2);
    return GainSpec::linear(parse_rational(toks[pos + 1], where));
  }
  if (kind == "log") {
    need(2);
    return GainSpec::log(parse_rational(toks[pos + 1], where));
  }
  if (kind == "pow") {
    need(3);
    return GainSpec::pow(parse_rational(toks[pos + 1], where),
                         parse_rational(toks[pos + 2], where));
  }
  if (kind == "pwl") {
    if (pos + 1 >= toks.size())
      throw input_error(where + ": missing pwl breakpoint count");
    long k = 0;
    try {
      k = std::stol(toks[pos + 1]);
    } catch (...) {
      throw input_error(where + ": malformed pwl breakpoint count");
    }
    if (k < 2 || k > 1000000)
      throw input_error(where + ": pwl needs between 2 and 1e6 breakpoints");
    need(2 + 2 * static_cast<std::size_t>(k));
    std::vector<Rational> xs, ys;
    for (long i = 0; i < k; ++i) {
      xs.push_back(parse_rational(toks[pos + 2 + 2 * i], where));
      ys.push_back(parse_rational(toks[pos + 3 + 2 * i], where));
    }
    return GainSpec::pwl(std::move(xs), std::move(ys));
  }
  throw input_error(where + ": unknown gain kind '" + kind + "'");
}
}  // namespace detail

inline Network read_network(std::istream& in,
                            const std::string& filename = "<input>") {
  Network net;
  long declared_n = -1, declared_m = -1;
  int seen_arcs = 0;
  std::vector<bool> node_seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = filename + ":" + std::to_string(lineno);
    auto toks = detail::split_ws(line);
    if (toks.empty() || toks[0] == "c") continue;
    if (toks[0] == "p") {
      if (declared_n >= 0) throw input_error(where + ": duplicate p line");
      if (toks.size() != 4 || toks[1] != "cgf")
        throw input_error(where + ": expected 'p cgf <n> <m>'");
      try {
        declared_n = std::stol(toks[2]);
        declared_m = std::stol(toks[3]);
      } catch (...) {
        throw input_error(where + ": malformed problem size");
      }
      if (declared_n < 1 || declared_m < 0)
        throw input_error(where + ": invalid problem size");
      net.b.assign(declared_n, Rational(0));
      net.M.assign(declared_n, Integer(1));
      node_seen.assign(declared_n, false);
      continue;
    }
    if (declared_n < 0)
      throw input_error(where + ": expected 'p cgf' line before data");
    if (toks[0] == "n") {
      if (toks.size() != 4)
        throw input_error(where + ": expected 'n <id> <b> <M>'");
      long id = 0;
      try {
        id = std::stol(toks[1]);
      } catch (...) {
        throw input_error(where + ": malformed node id");
      }
      if (id < 1 || id > declared_n)
        throw input_error(where + ": node id out of range");
      if (node_seen[id - 1])
        throw input_error(where + ": duplicate node line");
      node_seen[id - 1] = true;
      net.b[id - 1] = parse_rational(toks[2], where);
      Rational mw = parse_rational(toks[3], where);
      if (mw.get_den() != 1 || mw < 1)
        throw input_error(where +
                          ": penalty weight must be a positive integer");
      net.M[id - 1] = mw.get_num();
      continue;
    }
    if (toks[0] == "a") {
      if (toks.size() < 6)
        throw input_error(where + ": expected 'a <tail> <head> <l> <u> <gain>'");
      long t = 0, h = 0;
      try {
        t = std::stol(toks[1]);
        h = std::stol(toks[2]);
      } catch (...) {
        throw input_error(where + ": malformed arc endpoints");
      }
      if (t < 1 || t > declared_n || h < 1 || h > declared_n)
        throw input_error(where + ": arc endpoint out of range");
      Arc arc;
      arc.tail = static_cast<int>(t - 1);
      arc.head = static_cast<int>(h - 1);
      arc.lower = parse_rational(toks[3], where);
      arc.upper = parse_rational(toks[4], where);
      arc.gain = detail::parse_gain_tokens(toks, 5, where);
      net.arcs.push_back(std::move(arc));
      ++seen_arcs;
      if (seen_arcs > declared_m)
        throw input_error(where + ": more arcs than declared");
      continue;
    }
    throw input_error(where + ": unknown line type '" + toks[0] + "'");
  }
  if (declared_n < 0) throw input_error(filename + ": missing 'p cgf' line");
  if (seen_arcs != declared_m)
    throw input_error(filename + ": declared " + std::to_string(declared_m) +
                      " arcs but found " + std::to_string(seen_arcs));
  try {
    net.validate();
  } catch (const input_error& e) {
    throw input_error(filename + ": " + e.what());
  }
  return net;
}

inline void write_network(std::ostream& os, const Network& net) {
  os << "p cgf " << net.n() << " " << net.m() << "\n";
  for (int i = 0; i < net.n(); ++i)
    os << "n " << (i + 1) << " " << rational_to_string(net.b[i]) << " "
       << net.M[i].get_str() << "\n";
  for (const auto& a : net.arcs) {
    os << "a " << (a.tail + 1) << " " << (a.head + 1) << " "
       << rational_to_string(a.lower) << " " << rational_to_string(a.upper)
       << " ";
    switch (a.gain.kind) {
      case GainKind::Linear:
        os << "lin " << rational_to_string(a.gain.gamma);
        break;
      case GainKind::Log:
        os << "log " << rational_to_string(a.gain.c);
        break;
      case GainKind::Pow:
        os << "pow " << rational_to_string(a.gain.c) << " "
           << rational_to_string(a.gain.p);
        break;
      case GainKind::Pwl: {
        os << "pwl " << a.gain.px.size();
        for (std::size_t k = 0; k < a.gain.px.size(); ++k)
          os << " " << rational_to_string(a.gain.px[k]) << " "
             << rational_to_string(a.gain.py[k]);
        break;
      }
      case GainKind::Custom:
        throw input_error("custom gains are not serializable");
    }
    os << "\n";
  }
}

// --------------------------------------------------------------------------
// Normalization.
// --------------------------------------------------------------------------

// A demand correction that cannot be stored exactly: subtract
// Γ_base(at) from b[node], evaluated lazily in the working scalar type.
struct SymbolicOffset {
  int node;
  GainSpec base;
  Rational at;
};

struct Normalized {
  Network net;                       // ℓ ≡ 0, Γ(0) = 0 on every arc
  std::vector<Rational> lower_shift; // original ℓ per arc
  std::vector<SymbolicOffset> b_offsets;

  bool b_exact() const { return b_offsets.empty(); }

  // Demands in scalar type R with symbolic corrections applied.
  template <class R>
  std::vector<R> demands() const {
    std::vector<R> d(net.n());
    for (int i = 0; i < net.n(); ++i) d[i] = to_real<R>(net.b[i]);
    for (const auto& off : b_offsets) {
      GainOracle<R> g(off.base);
      d[off.node] -= g.value(to_real<R>(off.at));
    }
    return d;
  }

  // Maps flows on the normalized instance back to the original.
  template <class R>
  std::vector<R> denormalize(const std::vector<R>& flow) const {
    std::vector<R> f(flow);
    for (std::size_t a = 0; a < f.size(); ++a)
      f[a] += to_real<R>(lower_shift[a]);
    return f;
  }
};

inline Normalized normalize(const Network& input) {
  input.validate();
  Normalized out;
  out.net.b = input.b;
  out.net.M = input.M;
  out.lower_shift.reserve(input.m());

  for (int ai = 0; ai < input.m(); ++ai) {
    Arc a = input.arcs[ai];
    // Truncate the capacity where the gain stops increasing.
    if (auto su = a.gain.strict_upper()) {
      if (a.upper > *su && a.lower <= *su) a.upper = *su;
    }
    const Rational l = a.lower;
    out.lower_shift.push_back(l);

    switch (a.gain.kind) {
      case GainKind::Linear:
        // Γ̃(α) = γα; head absorbs γ·ℓ.
        if (l != 0) out.net.b[a.head] -= a.gain.gamma * l;
        break;
      case GainKind::Pwl: {
        // Rebase breakpoints onto [ℓ, u] − (ℓ, y(ℓ)), exactly.
        const Rational yl = a.gain.value_exact(l);
        std::vector<Rational> nx, ny;
        nx.push_back(0);
        ny.push_back(0);
        for (std::size_t k = 0; k < a.gain.px.size(); ++k) {
          if (a.gain.px[k] <= l) continue;
          if (a.gain.px[k] >= a.upper) break;
          nx.push_back(a.gain.px[k] - l);
          ny.push_back(a.gain.py[k] - yl);
        }
        nx.push_back(a.upper - l);
        ny.push_back(a.gain.value_exact(a.upper) - yl);
        if (nx.size() < 2 || nx[1] == nx[0]) {
          // Degenerate (ℓ == u): keep a two-point stub on [0, 1].
          nx = {Rational(0), Rational(1)};
          ny = {Rational(0), Rational(1)};
        }
        a.gain = GainSpec::pwl(std::move(nx), std::move(ny));
        if (yl != 0) out.net.b[a.head] -= yl;
        break;
      }
      case GainKind::Log:
      case GainKind::Pow:
        if (l != 0) {
          GainSpec base = a.gain;  // shift still 0 here
          a.gain.shift = a.gain.shift + l;
          out.b_offsets.push_back({a.head, base, l});
        }
        break;
      case GainKind::Custom:
        // Shifting a custom gain would need a re-registration per scalar
        // type; not supported.  Register customs on their final domain.
        if (l != 0)
          throw input_error("arc " + std::to_string(ai + 1) +
                            ": custom gains require a zero lower bound");
        break;
    }
    if (l != 0) {
      out.net.b[a.tail] += l;
      a.upper -= l;
      a.lower = 0;
    }
    out.net.add_arc(a.tail, a.head, a.lower, a.upper, a.gain);
  }
  return out;
}

}  // namespace genflow
