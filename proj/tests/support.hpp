#pragma once

// Independent reference computations shared by the unit and acceptance
// tests. They use direct definitions (element-wise matrices, exhaustive
// enumeration) rather than the library's algorithms.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "qsatlab/qsatlab.hpp"

namespace oracle {

using qsat::Qubit;

/// H(x, y) = sum_e [x, y agree off e] <x_e|Pi_e|y_e>, built entry by entry.
inline Eigen::MatrixXcd hamiltonian(const qsat::QsatInstance& inst) {
  const std::size_t dim = std::size_t{1} << inst.n();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t e = 0; e < inst.m(); ++e) {
    const auto& edge = inst.graph().edge(e);
    const Eigen::MatrixXcd& v = inst.frame(e).vectors;
    const Eigen::MatrixXcd p = v * v.adjoint();
    std::size_t mask = 0;
    for (Qubit q : edge) mask |= std::size_t{1} << q;
    auto local = [&](std::size_t x) {
      std::size_t l = 0;
      for (Qubit q : edge) l = (l << 1) | ((x >> q) & 1);
      return l;
    };
    for (std::size_t x = 0; x < dim; ++x) {
      for (std::size_t y = 0; y < dim; ++y) {
        if ((x & ~mask) != (y & ~mask)) continue;
        h(x, y) += p(local(x), local(y));
      }
    }
  }
  return h;
}

/// Number of eigenvalues of H below `tol`.
inline std::size_t null_count(const qsat::QsatInstance& inst, double tol = 1e-9) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(hamiltonian(inst),
                                                      Eigen::EigenvaluesOnly);
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    count += eig.eigenvalues()(i) < tol;
  }
  return count;
}

inline double lowest_eigenvalue(const qsat::QsatInstance& inst) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(hamiltonian(inst),
                                                      Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

/// Uniform random labelled tree on n vertices: attach vertex i to a uniform
/// earlier vertex, then relabel by a random permutation.
inline qsat::Hypergraph random_tree(std::size_t n, std::uint64_t seed) {
  qsat::Rng rng(seed);
  std::vector<Qubit> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.below(std::uint64_t{i})]);
  }
  std::vector<qsat::Edge> edges;
  for (std::size_t i = 1; i < n; ++i) {
    const auto parent = rng.below(std::uint64_t{i});
    edges.push_back({perm[i], perm[parent]});
  }
  return qsat::Hypergraph(n, 2, std::move(edges), seed);
}

/// A random tree on n vertices plus `extra` random new edges (connected,
/// cyclomatic excess = extra).
inline qsat::Hypergraph random_connected(std::size_t n, std::size_t extra,
                                         std::uint64_t seed) {
  auto edges = random_tree(n, seed).edges();
  qsat::Rng rng(qsat::derive_seed(seed, 99));
  while (extra > 0) {
    Qubit a = static_cast<Qubit>(rng.below(std::uint64_t{n}));
    Qubit b = static_cast<Qubit>(rng.below(std::uint64_t{n}));
    if (a == b) continue;
    qsat::Edge e{std::min(a, b), std::max(a, b)};
    if (std::find(edges.begin(), edges.end(), e) != edges.end()) continue;
    edges.push_back(e);
    --extra;
  }
  return qsat::Hypergraph(n, 2, std::move(edges), seed);
}

/// Figure-eight subgraphs by brute force: injective maps of the pattern
/// (ring 0..L-1 plus chord (0, d)) into the graph, divided by the number of
/// pattern automorphisms (itself counted by brute force).
inline std::uint64_t figure_eights(const qsat::Hypergraph& g, std::size_t L,
                                   std::size_t d) {
  std::vector<std::pair<std::size_t, std::size_t>> pattern;
  for (std::size_t i = 0; i < L; ++i) pattern.emplace_back(i, (i + 1) % L);
  pattern.emplace_back(0, d);
  const auto adj = qsat::adjacency(g);
  auto embeds = [&](const std::vector<Qubit>& map,
                    const std::vector<std::vector<Qubit>>& a) {
    for (auto [u, v] : pattern) {
      if (!qsat::adjacent(a, map[u], map[v])) return false;
    }
    return true;
  };
  // Automorphisms: injective maps of the pattern onto itself.
  std::vector<std::vector<Qubit>> self(L);
  for (auto [u, v] : pattern) {
    self[u].push_back(static_cast<Qubit>(v));
    self[v].push_back(static_cast<Qubit>(u));
  }
  for (auto& s : self) std::sort(s.begin(), s.end());
  std::vector<Qubit> perm(L);
  std::iota(perm.begin(), perm.end(), 0);
  std::uint64_t aut = 0;
  do {
    aut += embeds(perm, self);
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::uint64_t maps = 0;
  std::vector<Qubit> map;
  std::vector<char> used(g.n(), 0);
  auto extend = [&](auto&& self_fn) -> void {
    if (map.size() == L) {
      maps += embeds(map, adj);
      return;
    }
    for (Qubit q = 0; q < g.n(); ++q) {
      if (used[q]) continue;
      // Prune on ring edges as soon as both ends are placed.
      if (!map.empty() && !qsat::adjacent(adj, map.back(), q)) continue;
      used[q] = 1;
      map.push_back(q);
      self_fn(self_fn);
      map.pop_back();
      used[q] = 0;
    }
  };
  extend(extend);
  return maps / aut;
}

/// Haar-like random 2-vector.
inline Eigen::Vector2cd random_qubit(qsat::Rng& rng) {
  Eigen::Vector2cd v;
  for (int a = 0; a < 2; ++a) {
    const double re = rng.normal();
    v(a) = {re, rng.normal()};
  }
  return v.normalized();
}

inline Eigen::VectorXcd random_vector(qsat::Rng& rng, Eigen::Index dim) {
  Eigen::VectorXcd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double re = rng.normal();
    v(i) = {re, rng.normal()};
  }
  return v.normalized();
}

/// Instance with every frame replaced by the given edge vector.
inline qsat::QsatInstance uniform_instance(const qsat::Hypergraph& g,
                                           const Eigen::VectorXcd& phi) {
  std::vector<qsat::ProjectorFrame> frames;
  for (std::size_t i = 0; i < g.m(); ++i) {
    qsat::ProjectorFrame f;
    f.edge_index = i;
    f.vectors = phi.normalized();
    frames.push_back(std::move(f));
  }
  return qsat::QsatInstance(g, 1, std::move(frames), 0);
}

}  // namespace oracle
