#pragma once

// Random k-uniform hypergraphs and their classical structure: connected
// components, the hypercore left by leaf stripping, cyclomatic excess and
// figure-eight subgraph counts for ordinary graphs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qsatlab/error.hpp"
#include "qsatlab/io.hpp"
#include "qsatlab/rng.hpp"

namespace qsat {

using Qubit = std::uint32_t;
/// Strictly increasing tuple of qubit indices.
using Edge = std::vector<Qubit>;

/// N labelled qubits plus a set of distinct k-tuples, kept in canonical
/// (lexicographically sorted) order so equal graphs serialize identically.
class Hypergraph {
 public:
  Hypergraph() = default;

  Hypergraph(std::size_t n, int k, std::vector<Edge> edges = {},
             std::uint64_t seed = 0)
      : n_(n), k_(k), edges_(std::move(edges)), seed_(seed) {
    if (n_ == 0) throw ValidationError("hypergraph needs at least one qubit");
    if (k_ < 2) throw ValidationError("edge arity k must be at least 2");
    if (k_ > 20) throw ValidationError("edge arity k above 20 is unsupported");
    for (auto& e : edges_) {
      if (e.size() != static_cast<std::size_t>(k_)) {
        throw ValidationError("edge of size " + std::to_string(e.size()) +
                              " in a k=" + std::to_string(k_) + " hypergraph");
      }
      std::sort(e.begin(), e.end());
      if (std::adjacent_find(e.begin(), e.end()) != e.end()) {
        throw ValidationError("edge repeats a qubit index");
      }
      if (e.back() >= n_) {
        throw ValidationError("edge index " + std::to_string(e.back()) +
                              " out of range for n=" + std::to_string(n_));
      }
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
      throw ValidationError("duplicate edge in hypergraph");
    }
  }

  std::size_t n() const { return n_; }
  int k() const { return k_; }
  std::size_t m() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(std::size_t i) const { return edges_[i]; }
  std::uint64_t seed() const { return seed_; }
  double density() const { return static_cast<double>(m()) / n_; }

  bool operator==(const Hypergraph&) const = default;

 private:
  std::size_t n_ = 1;
  int k_ = 2;
  std::vector<Edge> edges_;
  std::uint64_t seed_ = 0;
};

/// Edge indices incident to every qubit.
inline std::vector<std::vector<std::size_t>> incidence(const Hypergraph& g) {
  std::vector<std::vector<std::size_t>> inc(g.n());
  for (std::size_t i = 0; i < g.m(); ++i) {
    for (Qubit q : g.edge(i)) inc[q].push_back(i);
  }
  return inc;
}

/// Sub-hypergraph on the same qubits keeping the listed edges.
inline Hypergraph with_edges(const Hypergraph& g,
                             const std::vector<std::size_t>& keep) {
  std::vector<Edge> edges;
  edges.reserve(keep.size());
  for (auto i : keep) edges.push_back(g.edge(i));
  return Hypergraph(g.n(), g.k(), std::move(edges), g.seed());
}

// ---------------------------------------------------------------------------
// Sampling

enum class EdgeModel {
  poisson,  ///< each k-tuple present independently with p = alpha n / C(n,k)
  fixed_m,  ///< exactly round(alpha n) distinct tuples, uniformly
};

inline EdgeModel parse_edge_model(const std::string& s) {
  if (s == "poisson") return EdgeModel::poisson;
  if (s == "fixed_m") return EdgeModel::fixed_m;
  throw ValidationError("unknown edge model '" + s +
                        "' (expected poisson or fixed_m)");
}

inline std::string to_string(EdgeModel m) {
  return m == EdgeModel::poisson ? "poisson" : "fixed_m";
}

namespace detail {

constexpr u128 kTupleSpaceCap = static_cast<u128>(1) << 100;

/// C(n, k) exactly, or nullopt once it passes kTupleSpaceCap.
inline std::optional<u128> binomial_capped(std::uint64_t n, int k) {
  if (k < 0 || static_cast<std::uint64_t>(k) > n) return u128{0};
  u128 c = 1;
  for (int j = 1; j <= k; ++j) {
    const u128 factor = n - k + j;
    if (c > ~u128{0} / factor) return std::nullopt;
    c = c * factor / j;  // c == C(n-k+j, j), exact at every step
    if (c > kTupleSpaceCap) return std::nullopt;
  }
  return c;
}

inline u128 binomial_u128(std::uint64_t n, int k) {
  return binomial_capped(n, k).value_or(kTupleSpaceCap + 1);
}

/// Colex unranking: the k-subset with rank `rank` among subsets of [0, n).
inline Edge unrank_tuple(u128 rank, std::uint64_t n, int k) {
  Edge e(static_cast<std::size_t>(k));
  std::uint64_t upper = n - 1;
  for (int i = k; i >= 1; --i) {
    // largest c in [i-1, upper] with C(c, i) <= rank
    std::uint64_t lo = static_cast<std::uint64_t>(i - 1), hi = upper;
    while (lo < hi) {
      const std::uint64_t mid = lo + (hi - lo + 1) / 2;
      if (binomial_u128(mid, i) <= rank) {
        lo = mid;
      } else {
        hi = mid - 1;
      }
    }
    e[static_cast<std::size_t>(i - 1)] = static_cast<Qubit>(lo);
    rank -= binomial_u128(lo, i);
    if (lo > 0) upper = lo - 1;
  }
  return e;
}

}  // namespace detail

/// Random k-uniform hypergraph with expected alpha*n edges.
///
/// Poisson mode walks the colex-ranked tuple space with geometric skips,
/// which realizes independent inclusion of every tuple at cost O(M): the
/// edge count is Binomial(C(n,k), p) and the chosen tuples are uniform and
/// distinct. Fixed-M mode draws round(alpha n) distinct ranks (Floyd).
inline Hypergraph sample_hypergraph(std::size_t n, int k, double alpha,
                                    EdgeModel mode, std::uint64_t seed) {
  if (k < 2) throw ValidationError("edge arity k must be at least 2");
  if (n < static_cast<std::size_t>(k)) {
    throw ValidationError("need n >= k (n=" + std::to_string(n) +
                          ", k=" + std::to_string(k) + ")");
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ValidationError("clause density alpha must be finite and >= 0");
  }
  const auto tuples = detail::binomial_capped(n, k);
  if (!tuples) throw CapacityError("C(n,k) exceeds the 2^100 tuple-space cap");
  const u128 total = *tuples;
  const double expected = alpha * static_cast<double>(n);
  if (expected > static_cast<double>(total)) {
    throw CapacityError("alpha*n = " + std::to_string(expected) +
                        " exceeds the C(n,k) available tuples");
  }

  Rng rng(seed);
  std::vector<u128> ranks;
  if (mode == EdgeModel::poisson) {
    const double p = expected / static_cast<double>(total);
    if (p >= 1.0) {
      for (u128 r = 0; r < total; ++r) ranks.push_back(r);
    } else if (p > 0.0) {
      const double log_q = std::log1p(-p);
      const double total_d = static_cast<double>(total);
      u128 next = 0;
      for (;;) {
        const double skip = std::floor(std::log(rng.uniform_pos()) / log_q);
        if (!(skip < total_d)) break;
        next += static_cast<u128>(skip);
        if (next >= total) break;
        ranks.push_back(next);
        ++next;
      }
    }
  } else {
    const auto m = static_cast<u128>(std::llround(expected));
    std::set<u128> chosen;
    for (u128 j = total - m; j < total; ++j) {
      const u128 t = rng.below(j + 1);
      if (!chosen.insert(t).second) chosen.insert(j);
    }
    ranks.assign(chosen.begin(), chosen.end());
  }

  std::vector<Edge> edges;
  edges.reserve(ranks.size());
  for (u128 r : ranks) edges.push_back(detail::unrank_tuple(r, n, k));
  return Hypergraph(n, k, std::move(edges), seed);
}

// ---------------------------------------------------------------------------
// Components

struct Components {
  std::vector<std::size_t> label;               ///< component of each qubit
  std::vector<std::vector<Qubit>> qubits;       ///< ascending per component
  std::vector<std::vector<std::size_t>> edges;  ///< edge indices per component

  std::size_t count() const { return qubits.size(); }
};

/// Connected components; isolated qubits are singletons. Components are
/// numbered in order of their smallest qubit.
inline Components connected_components(const Hypergraph& g) {
  std::vector<std::size_t> parent(g.n());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : g.edges()) {
    for (std::size_t j = 1; j < e.size(); ++j) {
      auto a = find(e[0]), b = find(e[j]);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  Components c;
  c.label.assign(g.n(), 0);
  std::vector<std::size_t> id_of_root(g.n(), SIZE_MAX);
  for (std::size_t q = 0; q < g.n(); ++q) {
    const auto root = find(q);
    if (id_of_root[root] == SIZE_MAX) {
      id_of_root[root] = c.qubits.size();
      c.qubits.emplace_back();
      c.edges.emplace_back();
    }
    c.label[q] = id_of_root[root];
    c.qubits[c.label[q]].push_back(static_cast<Qubit>(q));
  }
  for (std::size_t i = 0; i < g.m(); ++i) {
    c.edges[c.label[g.edge(i)[0]]].push_back(i);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Hypercore

struct HypercoreResult {
  Hypergraph core;                     ///< surviving edges, same qubit labels
  std::vector<std::size_t> core_edges;  ///< indices into the original graph
  std::vector<std::size_t> removal_order;  ///< stripped edges, in order
  std::size_t core_qubits = 0;          ///< qubits touched by core edges
};

/// Repeatedly removes an edge that contains a degree-1 qubit until none is
/// left. The resulting core does not depend on the removal order; pass
/// `shuffle_seed` to pick uniformly among the removable edges at each step
/// instead of the default FIFO order.
inline HypercoreResult hypercore(
    const Hypergraph& g, std::optional<std::uint64_t> shuffle_seed = {}) {
  const auto inc = incidence(g);
  std::vector<std::size_t> degree(g.n());
  for (std::size_t q = 0; q < g.n(); ++q) degree[q] = inc[q].size();
  std::vector<char> alive(g.m(), 1);
  HypercoreResult out;

  auto has_leaf = [&](std::size_t e) {
    return std::any_of(g.edge(e).begin(), g.edge(e).end(),
                       [&](Qubit q) { return degree[q] == 1; });
  };
  auto remove = [&](std::size_t e) {
    alive[e] = 0;
    out.removal_order.push_back(e);
    for (Qubit q : g.edge(e)) --degree[q];
  };

  if (!shuffle_seed) {
    std::deque<Qubit> leaves;
    for (std::size_t q = 0; q < g.n(); ++q) {
      if (degree[q] == 1) leaves.push_back(static_cast<Qubit>(q));
    }
    while (!leaves.empty()) {
      const Qubit q = leaves.front();
      leaves.pop_front();
      if (degree[q] != 1) continue;
      const auto e = *std::find_if(inc[q].begin(), inc[q].end(),
                                   [&](std::size_t i) { return alive[i]; });
      remove(e);
      for (Qubit w : g.edge(e)) {
        if (degree[w] == 1) leaves.push_back(w);
      }
    }
  } else {
    Rng rng(*shuffle_seed);
    for (;;) {
      std::vector<std::size_t> candidates;
      for (std::size_t e = 0; e < g.m(); ++e) {
        if (alive[e] && has_leaf(e)) candidates.push_back(e);
      }
      if (candidates.empty()) break;
      remove(candidates[rng.below(std::uint64_t{candidates.size()})]);
    }
  }

  for (std::size_t e = 0; e < g.m(); ++e) {
    if (alive[e]) out.core_edges.push_back(e);
  }
  out.core = with_edges(g, out.core_edges);
  for (std::size_t q = 0; q < g.n(); ++q) out.core_qubits += degree[q] > 0;
  return out;
}

// ---------------------------------------------------------------------------
// Statistics and k=2 classification

struct GraphStats {
  std::size_t component_count = 0;
  std::vector<std::size_t> component_sizes;
  std::vector<std::size_t> component_edges;
  std::size_t hypercore_qubits = 0;
  std::size_t hypercore_edges = 0;
  /// edges - nodes + 1 per component; only filled for k = 2.
  std::vector<std::int64_t> cyclomatic_excess;
  double giant_fraction = 0.0;

  std::int64_t max_excess() const {
    std::int64_t best = 0;
    for (auto x : cyclomatic_excess) best = std::max(best, x);
    return best;
  }
};

inline GraphStats graph_stats(const Hypergraph& g) {
  const auto comps = connected_components(g);
  const auto core = hypercore(g);
  GraphStats s;
  s.component_count = comps.count();
  std::size_t largest = 0;
  for (std::size_t c = 0; c < comps.count(); ++c) {
    s.component_sizes.push_back(comps.qubits[c].size());
    s.component_edges.push_back(comps.edges[c].size());
    largest = std::max(largest, comps.qubits[c].size());
    if (g.k() == 2) {
      s.cyclomatic_excess.push_back(
          static_cast<std::int64_t>(comps.edges[c].size()) -
          static_cast<std::int64_t>(comps.qubits[c].size()) + 1);
    }
  }
  s.hypercore_qubits = core.core_qubits;
  s.hypercore_edges = core.core.m();
  s.giant_fraction = static_cast<double>(largest) / g.n();
  return s;
}

inline json to_json(const GraphStats& s) {
  json j{{"component_count", s.component_count},
         {"component_sizes", s.component_sizes},
         {"component_edges", s.component_edges},
         {"hypercore_qubits", s.hypercore_qubits},
         {"hypercore_edges", s.hypercore_edges},
         {"giant_fraction", s.giant_fraction}};
  if (!s.cyclomatic_excess.empty()) {
    j["cyclomatic_excess"] = s.cyclomatic_excess;
  }
  return j;
}

enum class Satisfiability { sat, unsat };

inline std::string to_string(Satisfiability s) {
  return s == Satisfiability::sat ? "SAT" : "UNSAT";
}

/// Generic quantum verdict for 2-QSAT: SAT iff no connected component has
/// more than one independent cycle.
inline Satisfiability classify_satisfiability_k2(const Hypergraph& g) {
  if (g.k() != 2) {
    throw ValidationError("classify_satisfiability_k2 needs k = 2, got k=" +
                          std::to_string(g.k()));
  }
  return graph_stats(g).max_excess() <= 1 ? Satisfiability::sat
                                          : Satisfiability::unsat;
}

struct Thresholds {
  double alpha_gc = 0.0;                ///< giant component, 1/(k(k-1))
  std::optional<double> alpha_hc;       ///< hypercore; known for k = 2, 3
};

inline Thresholds thresholds(int k) {
  if (k < 2) throw ValidationError("thresholds need k >= 2");
  Thresholds t;
  t.alpha_gc = 1.0 / (static_cast<double>(k) * (k - 1));
  if (k == 2) t.alpha_hc = 0.5;
  if (k == 3) t.alpha_hc = 0.81;
  return t;
}

// ---------------------------------------------------------------------------
// Ordinary-graph helpers (k = 2)

/// Sorted neighbour lists of a k=2 graph.
inline std::vector<std::vector<Qubit>> adjacency(const Hypergraph& g) {
  if (g.k() != 2) throw ValidationError("adjacency lists need k = 2");
  std::vector<std::vector<Qubit>> adj(g.n());
  for (const auto& e : g.edges()) {
    adj[e[0]].push_back(e[1]);
    adj[e[1]].push_back(e[0]);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return adj;
}

inline bool adjacent(const std::vector<std::vector<Qubit>>& adj, Qubit a,
                     Qubit b) {
  return std::binary_search(adj[a].begin(), adj[a].end(), b);
}

/// Calls `visit(cycle)` for every simple cycle of length `length` exactly
/// once; `cycle` starts at its smallest vertex and cycle[1] < cycle.back().
template <typename Visit>
void for_each_cycle(const std::vector<std::vector<Qubit>>& adj,
                    std::size_t length, Visit&& visit) {
  if (length < 3) return;
  std::vector<Qubit> path;
  std::vector<char> on_path(adj.size(), 0);
  auto extend = [&](auto&& self, Qubit start) -> void {
    const Qubit u = path.back();
    if (path.size() == length) {
      if (path[1] < path.back() && adjacent(adj, u, start)) visit(path);
      return;
    }
    for (Qubit w : adj[u]) {
      if (w <= start || on_path[w]) continue;
      path.push_back(w);
      on_path[w] = 1;
      self(self, start);
      on_path[w] = 0;
      path.pop_back();
    }
  };
  for (Qubit s = 0; s < adj.size(); ++s) {
    path.assign(1, s);
    on_path[s] = 1;
    extend(extend, s);
    on_path[s] = 0;
  }
}

inline constexpr std::size_t kFigureEightLengthCap = 12;

/// Number of figure-eight subgraphs: an L-cycle plus one chord joining two
/// cycle vertices at cycle distance d. Each subgraph (edge set) counts once.
inline std::uint64_t count_figure_eights(
    const Hypergraph& g, std::size_t length, std::size_t distance,
    std::size_t max_length = kFigureEightLengthCap) {
  if (g.k() != 2) throw ValidationError("figure-eight census needs k = 2");
  if (length < 4 || length % 2 != 0) {
    throw ValidationError("figure-eight loop length L must be even and >= 4");
  }
  if (distance < 2 || 2 * distance > length) {
    throw ValidationError("crossbar separation d must satisfy 2 <= d <= L/2");
  }
  if (length > max_length) {
    throw CapacityError("figure-eight enumeration capped at L <= " +
                        std::to_string(max_length));
  }
  const auto adj = adjacency(g);
  const bool opposite = 2 * distance == length;
  const std::size_t starts = opposite ? length / 2 : length;
  std::uint64_t count = 0;
  for_each_cycle(adj, length, [&](const std::vector<Qubit>& c) {
    for (std::size_t i = 0; i < starts; ++i) {
      count += adjacent(adj, c[i], c[(i + distance) % length]);
    }
  });
  return count;
}

// ---------------------------------------------------------------------------
// Fixed shapes

/// Ring 0-1-...-(n-1)-0.
inline Hypergraph cycle_graph(std::size_t n, std::uint64_t seed = 0) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    edges.push_back({static_cast<Qubit>(i), static_cast<Qubit>((i + 1) % n)});
  }
  return Hypergraph(n, 2, std::move(edges), seed);
}

/// Ring of `length` qubits plus the chord (0, distance).
inline Hypergraph figure_eight_graph(std::size_t length, std::size_t distance,
                                     std::uint64_t seed = 0) {
  if (distance < 2 || 2 * distance > length) {
    throw ValidationError("figure-eight chord needs 2 <= d <= L/2");
  }
  auto edges = cycle_graph(length).edges();
  edges.push_back({0, static_cast<Qubit>(distance)});
  return Hypergraph(length, 2, std::move(edges), seed);
}

/// Open chain of `length` k-edges, consecutive edges sharing one qubit.
inline Hypergraph hyperchain(int k, std::size_t length) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < length; ++i) {
    Edge e;
    for (int j = 0; j < k; ++j) {
      e.push_back(static_cast<Qubit>(i * (k - 1) + j));
    }
    edges.push_back(std::move(e));
  }
  return Hypergraph(length * (k - 1) + 1, k, std::move(edges));
}

// ---------------------------------------------------------------------------
// Graph file: {"n", "k", "seed", "edges"}

inline json to_json(const Hypergraph& g) {
  return json{{"n", g.n()}, {"k", g.k()}, {"seed", g.seed()},
              {"edges", g.edges()}};
}

inline Hypergraph hypergraph_from_json(const json& j) {
  using detail::field;
  using detail::get_as;
  const auto n = get_as<std::size_t>(field(j, "n", "graph"), "graph.n");
  const auto k = get_as<int>(field(j, "k", "graph"), "graph.k");
  std::uint64_t seed = 0;
  if (j.contains("seed")) seed = get_as<std::uint64_t>(j["seed"], "graph.seed");
  const auto& ej = field(j, "edges", "graph");
  if (!ej.is_array()) throw ParseError("graph.edges: expected an array");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < ej.size(); ++i) {
    edges.push_back(
        get_as<Edge>(ej[i], "graph.edges[" + std::to_string(i) + "]"));
  }
  return Hypergraph(n, k, std::move(edges), seed);
}

}  // namespace qsat
