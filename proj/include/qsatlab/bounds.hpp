#pragma once

// Closed-form thresholds, random-graph subgraph counts, exhaustive
// classical frustration, and classical UNSAT certificates for k = 2.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "qsatlab/error.hpp"
#include "qsatlab/hypergraph.hpp"
#include "qsatlab/instance.hpp"

namespace qsat {

// ---------------------------------------------------------------------------
// Weak bound

inline void require_rank(int k, int r) {
  if (k < 1 || k > 30) throw ValidationError("k out of range");
  if (r < 1 || static_cast<double>(r) > std::ldexp(1.0, k)) {
    throw ValidationError("rank r=" + std::to_string(r) + " outside [1, 2^k]");
  }
}

/// -1 / log2(1 - r/2^k); 0 when r = 2^k.
inline double alpha_weak_bound(int k, int r) {
  require_rank(k, r);
  const double x = static_cast<double>(r) / std::ldexp(1.0, k);
  if (x >= 1.0) return 0.0;
  return -1.0 / std::log2(1.0 - x);
}

/// log2 of 2^n (1 - r/2^k)^M; -inf when r = 2^k and M > 0.
inline double weak_dim_bound(double n, double m, int k, int r) {
  require_rank(k, r);
  const double x = static_cast<double>(r) / std::ldexp(1.0, k);
  if (m == 0.0) return n;
  if (x >= 1.0) return -std::numeric_limits<double>::infinity();
  return n + m * std::log1p(-x) / std::log(2.0);
}

// ---------------------------------------------------------------------------
// Expected subgraph counts in G(n, p)

struct CountingQuery {
  double n = 0;
  double p = 0;
  double vertices = 0;       ///< |A|
  double edges = 0;          ///< e(A)
  double automorphisms = 1;  ///< |Aut(A)|
};

/// log E#(A in G) = log n! - log (n - |A|)! - log |Aut| + e log p.
inline double expected_subgraph_log_count(const CountingQuery& q) {
  if (!(q.n > 0) || !(q.p > 0) || !(q.vertices > 0) ||
      !(q.automorphisms > 0) || q.edges < 0) {
    throw ValidationError("counting query fields must be positive");
  }
  if (q.vertices > q.n) throw ValidationError("subgraph larger than graph");
  return std::lgamma(q.n + 1) - std::lgamma(q.n - q.vertices + 1) -
         std::log(q.automorphisms) + q.edges * std::log(q.p);
}

inline double expected_subgraph_count(const CountingQuery& q) {
  return std::exp(expected_subgraph_log_count(q));
}

/// Edge probability of the fixed-density ensemble: alpha n / C(n, 2).
inline double ensemble_edge_probability(double n, double alpha) {
  return alpha * n / (n * (n - 1) / 2);
}

/// |Aut| of an L-cycle with a chord at cycle distance d: 4 when the chord
/// joins opposite vertices, 2 otherwise.
inline double figure_eight_automorphisms(std::size_t length,
                                         std::size_t distance) {
  return 2 * distance == length ? 4.0 : 2.0;
}

/// Descriptor of K disjoint figure-eights of L vertices each:
/// |A| = KL, e = K(L+1), |Aut| = K! 2^K.
inline CountingQuery figure_eight_query(double n, double p, double K,
                                        double L) {
  return {n, p, K * L, K * (L + 1), std::exp(std::lgamma(K + 1)) *
                                        std::pow(2.0, K)};
}

/// log of n! p^{K(L+1)} / ((n - KL)! K! 2^K), evaluated directly.
inline double figure_eight_log_count(double n, double p, double K, double L) {
  if (!(n > 0) || !(p > 0) || !(K > 0) || !(L > 0)) {
    throw ValidationError("figure-eight count needs positive n, p, K, L");
  }
  if (K * L > n) throw ValidationError("K L exceeds n");
  return std::lgamma(n + 1) + K * (L + 1) * std::log(p) -
         std::lgamma(n - K * L + 1) - std::lgamma(K + 1) - K * std::log(2.0);
}

/// Asymptotic log-count of K disjoint figure-eights of size L at density
/// alpha; requires KL <= n/10.
inline double figure_eight_entropy(double n, double alpha, double K,
                                   double L) {
  if (!(alpha > 0)) throw ValidationError("alpha must be positive");
  if (!(n > 0) || !(K > 0) || !(L > 0)) {
    throw ValidationError("n, K, L must be positive");
  }
  if (K * L > n / 10) {
    throw ValidationError("entropy formula needs K L <= n / 10");
  }
  const double kl = K * L;
  return kl * (std::log(2 * alpha) - kl / n) +
         K * (std::log(alpha) + 1 - std::log(K) - std::log(n));
}

// ---------------------------------------------------------------------------
// Classical frustration

inline constexpr double kFrustrationCap = 1e8;

struct FrustrationResult {
  std::uint64_t min_count = 0;       ///< fewest satisfying assignments
  std::vector<std::string> clauses;  ///< an argmin, one forbidden string per edge
  std::uint64_t evaluated = 0;       ///< clause assignments visited
};

/// Minimum over all classical clause choices (one forbidden configuration
/// per edge) of the number of satisfying assignments. Exhaustive.
inline FrustrationResult most_frustrated_classical(const Hypergraph& g,
                                                   double cap = kFrustrationCap) {
  const double work = std::pow(std::ldexp(1.0, g.k()), static_cast<double>(g.m())) *
                      std::ldexp(1.0, static_cast<int>(g.n()));
  if (work > cap || g.n() > 30) {
    throw CapacityError("exhaustive frustration search needs (2^k)^M 2^N <= " +
                        std::to_string(static_cast<std::uint64_t>(cap)) +
                        "; use the certificate path instead");
  }
  const std::size_t states = std::size_t{1} << g.n();
  const std::size_t words = (states + 63) / 64;
  const std::size_t configs = std::size_t{1} << g.k();

  // allowed[e][c]: assignments whose restriction to edge e is not c.
  std::vector<std::vector<std::vector<std::uint64_t>>> allowed(
      g.m(), std::vector<std::vector<std::uint64_t>>(
                 configs, std::vector<std::uint64_t>(words, 0)));
  for (std::size_t e = 0; e < g.m(); ++e) {
    const Edge& edge = g.edge(e);
    for (std::size_t x = 0; x < states; ++x) {
      std::size_t c = 0;
      for (Qubit q : edge) c = (c << 1) | ((x >> q) & 1);
      for (std::size_t f = 0; f < configs; ++f) {
        if (f != c) allowed[e][f][x / 64] |= std::uint64_t{1} << (x % 64);
      }
    }
  }

  FrustrationResult best;
  best.min_count = states;
  std::vector<std::size_t> choice(g.m(), 0), best_choice(g.m(), 0);
  std::vector<std::vector<std::uint64_t>> alive(
      g.m() + 1, std::vector<std::uint64_t>(words, 0));
  for (std::size_t x = 0; x < states; ++x) {
    alive[0][x / 64] |= std::uint64_t{1} << (x % 64);
  }
  auto popcount = [&](const std::vector<std::uint64_t>& v) {
    std::uint64_t s = 0;
    for (auto w : v) s += static_cast<std::uint64_t>(std::popcount(w));
    return s;
  };
  auto search = [&](auto&& self, std::size_t e) -> void {
    if (best.min_count == 0) return;
    if (e == g.m()) {
      ++best.evaluated;
      const auto count = popcount(alive[e]);
      if (count < best.min_count) {
        best.min_count = count;
        best_choice = choice;
      }
      return;
    }
    for (std::size_t f = 0; f < configs; ++f) {
      choice[e] = f;
      for (std::size_t w = 0; w < words; ++w) {
        alive[e + 1][w] = alive[e][w] & allowed[e][f][w];
      }
      self(self, e + 1);
      if (best.min_count == 0) return;
    }
  };
  search(search, 0);
  for (auto f : best_choice) best.clauses.push_back(clause_string(f, g.k()));
  return best;
}

/// Number of assignments satisfying the classical instance.
inline std::uint64_t count_classical_solutions(
    const Hypergraph& g, const std::vector<std::string>& clauses) {
  if (g.n() > 30) throw CapacityError("exhaustive count needs N <= 30");
  if (clauses.size() != g.m()) {
    throw ValidationError("one clause per edge is required");
  }
  std::vector<std::size_t> forbidden;
  for (const auto& c : clauses) forbidden.push_back(clause_index(c, g.k()));
  std::uint64_t count = 0;
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << g.n()); ++x) {
    bool ok = true;
    for (std::size_t e = 0; ok && e < g.m(); ++e) {
      std::size_t c = 0;
      for (Qubit q : g.edge(e)) c = (c << 1) | ((x >> q) & 1);
      ok = c != forbidden[e];
    }
    count += ok;
  }
  return count;
}

// ---------------------------------------------------------------------------
// Classical UNSAT certificate, k = 2

inline constexpr std::size_t kCertificateVerifyCap = 20;

struct UnsatCertificate {
  std::vector<std::string> clauses;     ///< forbidden string per edge
  std::size_t component = 0;            ///< component carrying the pattern
  std::vector<std::size_t> pattern_edges;
  /// Exhaustive check result when N <= 20; empty otherwise.
  std::optional<bool> verified;
};

namespace detail {

/// A run of degree-2 vertices between two branch vertices (equal for a loop).
struct Chain {
  std::vector<Qubit> path;          ///< path.front() and path.back() are branches
  std::vector<std::size_t> edges;   ///< edge indices along the path
};

/// Leaves-stripped version of an edge subset of a k=2 graph.
inline std::vector<std::size_t> two_core(const Hypergraph& g,
                                         std::vector<std::size_t> edges) {
  std::vector<std::size_t> deg(g.n(), 0);
  for (auto e : edges) {
    ++deg[g.edge(e)[0]];
    ++deg[g.edge(e)[1]];
  }
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<std::size_t> kept;
    for (auto e : edges) {
      const auto& ed = g.edge(e);
      if (deg[ed[0]] == 1 || deg[ed[1]] == 1) {
        --deg[ed[0]];
        --deg[ed[1]];
        changed = true;
      } else {
        kept.push_back(e);
      }
    }
    edges = std::move(kept);
  }
  return edges;
}

/// Decomposes a 2-core edge set with at least one vertex of degree >= 3
/// into chains between branch vertices.
inline std::vector<Chain> chains_of(const Hypergraph& g,
                                    const std::vector<std::size_t>& edges) {
  std::vector<std::vector<std::size_t>> inc(g.n());
  for (auto e : edges) {
    inc[g.edge(e)[0]].push_back(e);
    inc[g.edge(e)[1]].push_back(e);
  }
  std::vector<char> used(g.m(), 0);
  std::vector<Chain> chains;
  for (Qubit b = 0; b < g.n(); ++b) {
    if (inc[b].size() < 3) continue;
    for (auto start : inc[b]) {
      if (used[start]) continue;
      Chain c;
      c.path.push_back(b);
      std::size_t e = start;
      Qubit at = b;
      for (;;) {
        used[e] = 1;
        c.edges.push_back(e);
        at = g.edge(e)[0] == at ? g.edge(e)[1] : g.edge(e)[0];
        c.path.push_back(at);
        if (inc[at].size() != 2) break;
        e = inc[at][0] == e ? inc[at][1] : inc[at][0];
      }
      chains.push_back(std::move(c));
    }
  }
  return chains;
}

/// Forbidden string for edge (a, b) given forbidden values of a and b.
inline std::string forbid(const Hypergraph& g, std::size_t e, Qubit a, int va,
                          int vb) {
  const auto& ed = g.edge(e);
  const int first = ed[0] == a ? va : vb;
  const int second = ed[0] == a ? vb : va;
  return std::string{static_cast<char>('0' + first),
                     static_cast<char>('0' + second)};
}

/// Clauses along a chain so that it forbids exactly (front = s, back = t):
/// front = s implies the next vertex is 1, each 1 propagates, and the last
/// interior 1 forces back != t.
inline void realize_chain(const Hypergraph& g, const Chain& c, int s, int t,
                          std::vector<std::string>& clauses) {
  const auto len = c.edges.size();
  if (len == 1) {
    clauses[c.edges[0]] = forbid(g, c.edges[0], c.path[0], s, t);
    return;
  }
  for (std::size_t i = 0; i < len; ++i) {
    const int va = i == 0 ? s : 1;
    const int vb = i + 1 == len ? t : 0;
    clauses[c.edges[i]] =
        forbid(g, c.edges[i], c.path[i], va, vb);
  }
}

/// Tries every choice of forbidden pair per chain; returns the choices
/// (s, t per chain) that leave no consistent assignment of branch values.
inline std::optional<std::vector<std::pair<int, int>>> solve_branch_system(
    const std::vector<Chain>& chains) {
  std::vector<Qubit> branches;
  for (const auto& c : chains) {
    branches.push_back(c.path.front());
    branches.push_back(c.path.back());
  }
  std::sort(branches.begin(), branches.end());
  branches.erase(std::unique(branches.begin(), branches.end()),
                 branches.end());
  if (branches.size() > 16 || chains.size() > 12) return std::nullopt;
  auto index = [&](Qubit q) {
    return static_cast<std::size_t>(
        std::lower_bound(branches.begin(), branches.end(), q) -
        branches.begin());
  };
  const std::size_t combos = std::size_t{1} << (2 * chains.size());
  for (std::size_t choice = 0; choice < combos; ++choice) {
    // A loop chain can only forbid one value of its vertex (s = t).
    bool valid = true;
    for (std::size_t c = 0; valid && c < chains.size(); ++c) {
      valid = chains[c].path.front() != chains[c].path.back() ||
              ((choice >> (2 * c)) & 1) == ((choice >> (2 * c + 1)) & 1);
    }
    if (!valid) continue;
    bool any_sat = false;
    for (std::size_t x = 0; !any_sat && x < (std::size_t{1} << branches.size());
         ++x) {
      bool ok = true;
      for (std::size_t c = 0; ok && c < chains.size(); ++c) {
        const int s = static_cast<int>((choice >> (2 * c)) & 1);
        const int t = static_cast<int>((choice >> (2 * c + 1)) & 1);
        const int xa = static_cast<int>((x >> index(chains[c].path.front())) & 1);
        const int xb = static_cast<int>((x >> index(chains[c].path.back())) & 1);
        ok = !(xa == s && xb == t);
      }
      any_sat = ok;
    }
    if (!any_sat) {
      std::vector<std::pair<int, int>> out;
      for (std::size_t c = 0; c < chains.size(); ++c) {
        out.emplace_back(static_cast<int>((choice >> (2 * c)) & 1),
                         static_cast<int>((choice >> (2 * c + 1)) & 1));
      }
      return out;
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Classical clause choice with no satisfying assignment, built on the
/// first component that carries one. Every 2-core made of exactly two
/// independent cycles other than a theta (two vertices joined by three
/// paths) admits one, as does every 2-core with three or more.
inline UnsatCertificate unsat_certificate_k2(const Hypergraph& g) {
  if (g.k() != 2) throw ValidationError("the certificate needs k = 2");
  const auto comps = connected_components(g);
  bool any_excess = false;
  for (std::size_t c = 0; c < comps.count(); ++c) {
    const auto excess = static_cast<std::int64_t>(comps.edges[c].size()) -
                        static_cast<std::int64_t>(comps.qubits[c].size()) + 1;
    if (excess < 2) continue;
    any_excess = true;
    const auto core = detail::two_core(g, comps.edges[c]);

    // Spanning forest of the core; the remaining edges close cycles.
    std::vector<std::size_t> parent(g.n());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    std::vector<std::size_t> tree, extra;
    for (auto e : core) {
      const auto a = find(g.edge(e)[0]), b = find(g.edge(e)[1]);
      if (a == b) {
        extra.push_back(e);
      } else {
        parent[a] = b;
        tree.push_back(e);
      }
    }
    const std::size_t limit = std::min<std::size_t>(extra.size(), 10);
    std::vector<std::vector<std::size_t>> subsets;
    for (std::size_t i = 0; i < limit; ++i) {
      for (std::size_t j = i + 1; j < limit; ++j) subsets.push_back({i, j});
    }
    for (std::size_t i = 0; i < limit; ++i) {
      for (std::size_t j = i + 1; j < limit; ++j) {
        for (std::size_t l = j + 1; l < limit; ++l) subsets.push_back({i, j, l});
      }
    }
    for (const auto& subset : subsets) {
      auto edges = tree;
      for (auto i : subset) edges.push_back(extra[i]);
      const auto pattern = detail::two_core(g, edges);
      const auto chains = detail::chains_of(g, pattern);
      const auto choice = detail::solve_branch_system(chains);
      if (!choice) continue;
      UnsatCertificate cert;
      cert.component = c;
      cert.clauses.assign(g.m(), "00");
      for (std::size_t i = 0; i < chains.size(); ++i) {
        detail::realize_chain(g, chains[i], (*choice)[i].first,
                              (*choice)[i].second, cert.clauses);
      }
      cert.pattern_edges = pattern;
      std::sort(cert.pattern_edges.begin(), cert.pattern_edges.end());
      if (g.n() <= kCertificateVerifyCap) {
        cert.verified = count_classical_solutions(g, cert.clauses) == 0;
      }
      return cert;
    }
  }
  if (!any_excess) {
    throw ValidationError(
        "no component has two or more independent cycles");
  }
  throw ValidationError(
      "no classical UNSAT assignment found: every component with two or more "
      "cycles is a theta graph, which is always classically satisfiable");
}

}  // namespace qsat
