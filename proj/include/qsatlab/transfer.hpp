#pragma once

// Zero-energy product states built from transfer matrices: 2-qubit
// transfers on trees and single loops (k = 2), and the k-1 -> 1 transfer
// used to lift a product state through leaf hyperedges.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qsatlab/error.hpp"
#include "qsatlab/hypergraph.hpp"
#include "qsatlab/instance.hpp"
#include "qsatlab/kernel.hpp"

namespace qsat {

/// |det T| below this is treated as a singular transfer.
inline constexpr double kSingularTransfer = 1e-8;
/// Relative eigenvalue gap below this is a degenerate loop.
inline constexpr double kDegenerateLoop = 1e-8;
/// Contraction norm below this cannot fix the dangling qubit.
inline constexpr double kDegenerateContraction = 1e-8;
/// Residual accepted for a core state handed to lift_product_state.
inline constexpr double kCoreResidualTol = 1e-10;

/// Maps a state psi of `source` to the partner state T psi of `target` such
/// that psi (x) T psi is orthogonal to the edge vector.
struct TransferMatrix2 {
  Eigen::Matrix2cd t;
  Qubit source = 0;
  Qubit target = 0;
  std::size_t edge = 0;

  cplx det() const { return t.determinant(); }
  bool singular() const { return std::abs(det()) < kSingularTransfer; }
};

/// T for the 4-vector phi on (first, second): rows
/// [phi*_01, phi*_11; -phi*_00, -phi*_10].
inline TransferMatrix2 bravyi_transfer(const Eigen::Vector4cd& phi) {
  TransferMatrix2 m;
  m.t << std::conj(phi(1)), std::conj(phi(3)), -std::conj(phi(0)),
      -std::conj(phi(2));
  m.target = 1;
  return m;
}

/// Edge vector with the two qubits exchanged.
inline Eigen::Vector4cd swap_qubits(const Eigen::Vector4cd& phi) {
  return Eigen::Vector4cd(phi(0), phi(2), phi(1), phi(3));
}

/// Transfer across edge `e` of a rank-1, k=2 instance from `source` to the
/// other endpoint.
inline TransferMatrix2 edge_transfer(const QsatInstance& inst, std::size_t e,
                                     Qubit source) {
  const Edge& edge = inst.graph().edge(e);
  Eigen::Vector4cd phi = inst.frame(e).vectors.col(0);
  if (source == edge[1]) phi = swap_qubits(phi);
  TransferMatrix2 m = bravyi_transfer(phi);
  m.source = source;
  m.target = source == edge[0] ? edge[1] : edge[0];
  m.edge = e;
  return m;
}

/// Per-qubit pairs (up, down) propagated from a root through a spanning tree.
struct TransferBasis {
  Qubit root = 0;
  std::vector<Qubit> qubits;  ///< covered qubits, in BFS order
  std::vector<std::optional<Eigen::Vector2cd>> up, down;  ///< indexed by qubit
  /// Norms of T up_parent and T down_parent before normalization (1 at root).
  std::vector<double> up_scale, down_scale;
  std::vector<std::optional<Qubit>> parent;
  std::vector<std::size_t> tree_edges;

  /// Product state with every covered qubit up (or down); others |0>.
  ProductState product_state(bool take_up) const {
    ProductState s = ProductState::all_zero(up.size());
    for (Qubit q : qubits) s.factors[q] = take_up ? *up[q] : *down[q];
    return s;
  }
};

namespace detail {

inline void require_k2_rank1(const QsatInstance& inst, const char* what) {
  if (inst.k() != 2 || inst.rank() != 1) {
    throw ValidationError(std::string(what) + " needs k = 2 and r = 1");
  }
}

/// BFS tree of the component of `root`; returns (order, parent edge).
inline std::pair<std::vector<Qubit>, std::vector<std::optional<std::size_t>>>
bfs_tree(const Hypergraph& g, Qubit root) {
  const auto inc = incidence(g);
  std::vector<std::optional<std::size_t>> via(g.n());
  std::vector<char> seen(g.n(), 0);
  std::vector<Qubit> order{root};
  seen[root] = 1;
  for (std::size_t head = 0; head < order.size(); ++head) {
    const Qubit u = order[head];
    for (auto e : inc[u]) {
      const Qubit w = g.edge(e)[0] == u ? g.edge(e)[1] : g.edge(e)[0];
      if (!seen[w]) {
        seen[w] = 1;
        via[w] = e;
        order.push_back(w);
      }
    }
  }
  return {order, via};
}

inline TransferBasis propagate(const QsatInstance& inst, Qubit root,
                               const Eigen::Vector2cd& root_up,
                               const Eigen::Vector2cd& root_down) {
  const auto& g = inst.graph();
  auto [order, via] = bfs_tree(g, root);
  TransferBasis b;
  b.root = root;
  b.qubits = order;
  b.up.assign(g.n(), std::nullopt);
  b.down.assign(g.n(), std::nullopt);
  b.up_scale.assign(g.n(), 1.0);
  b.down_scale.assign(g.n(), 1.0);
  b.parent.assign(g.n(), std::nullopt);
  b.up[root] = root_up.normalized();
  b.down[root] = root_down.normalized();
  for (std::size_t i = 1; i < order.size(); ++i) {
    const Qubit q = order[i];
    const auto e = *via[q];
    const Qubit p = g.edge(e)[0] == q ? g.edge(e)[1] : g.edge(e)[0];
    const auto tm = edge_transfer(inst, e, p);
    if (tm.singular()) {
      throw DegeneracyError("singular transfer matrix on edge " +
                            std::to_string(e) + " (" + std::to_string(p) +
                            ", " + std::to_string(q) + ")");
    }
    const Eigen::Vector2cd u = tm.t * *b.up[p];
    const Eigen::Vector2cd d = tm.t * *b.down[p];
    b.up_scale[q] = u.norm();
    b.down_scale[q] = d.norm();
    b.up[q] = u / b.up_scale[q];
    b.down[q] = d / b.down_scale[q];
    b.parent[q] = p;
    b.tree_edges.push_back(e);
  }
  return b;
}

inline std::int64_t component_excess(const Hypergraph& g, Qubit q) {
  const auto comps = connected_components(g);
  const auto c = comps.label[q];
  return static_cast<std::int64_t>(comps.edges[c].size()) -
         static_cast<std::int64_t>(comps.qubits[c].size()) + 1;
}

}  // namespace detail

/// Transfer basis over the tree component containing `root`. The default
/// root basis is the computational one.
inline TransferBasis build_transfer_basis(
    const QsatInstance& inst, Qubit root,
    const Eigen::Vector2cd& root_up = Eigen::Vector2cd(1.0, 0.0),
    const Eigen::Vector2cd& root_down = Eigen::Vector2cd(0.0, 1.0)) {
  detail::require_k2_rank1(inst, "build_transfer_basis");
  if (root >= inst.n()) throw ValidationError("root qubit out of range");
  if (detail::component_excess(inst.graph(), root) != 0) {
    throw ValidationError("component of qubit " + std::to_string(root) +
                          " is not a tree");
  }
  return detail::propagate(inst, root, root_up, root_down);
}

struct LoopEigenbasis {
  cplx lambda_up, lambda_down;
  Eigen::Matrix2cd loop_product;  ///< T around the cycle, starting at base
  std::vector<Qubit> cycle;       ///< base first, then around the loop
  TransferBasis basis;            ///< rooted at base with the eigenvectors
};

/// Eigenbasis of the loop transfer product for the single-cycle component
/// containing `base` (which must lie on the cycle).
inline LoopEigenbasis loop_eigenbasis(const QsatInstance& inst, Qubit base) {
  detail::require_k2_rank1(inst, "loop_eigenbasis");
  const auto& g = inst.graph();
  if (base >= g.n()) throw ValidationError("base qubit out of range");
  if (detail::component_excess(g, base) != 1) {
    throw ValidationError("component of qubit " + std::to_string(base) +
                          " does not have exactly one cycle");
  }
  const auto core = hypercore(g);
  const auto inc = incidence(core.core);
  if (inc[base].size() != 2) {
    throw ValidationError("qubit " + std::to_string(base) +
                          " is not on the cycle");
  }

  LoopEigenbasis out;
  Eigen::Matrix2cd product = Eigen::Matrix2cd::Identity();
  Qubit prev = base;
  // Walk towards the smaller neighbour first.
  std::size_t edge = inc[base][0];
  {
    const auto& e0 = core.core.edge(inc[base][0]);
    const auto& e1 = core.core.edge(inc[base][1]);
    const Qubit n0 = e0[0] == base ? e0[1] : e0[0];
    const Qubit n1 = e1[0] == base ? e1[1] : e1[0];
    if (n1 < n0) edge = inc[base][1];
  }
  out.cycle.push_back(base);
  for (;;) {
    const auto& ce = core.core.edge(edge);
    const Qubit next = ce[0] == prev ? ce[1] : ce[0];
    product = edge_transfer(inst, core.core_edges[edge], prev).t * product;
    if (next == base) break;
    out.cycle.push_back(next);
    const auto& nb = inc[next];
    edge = nb[0] == edge ? nb[1] : nb[0];
    prev = next;
  }
  out.loop_product = product;

  Eigen::ComplexEigenSolver<Eigen::Matrix2cd> eig(product);
  cplx l0 = eig.eigenvalues()(0), l1 = eig.eigenvalues()(1);
  Eigen::Vector2cd v0 = eig.eigenvectors().col(0);
  Eigen::Vector2cd v1 = eig.eigenvectors().col(1);
  const double scale = std::max(std::abs(l0), std::abs(l1));
  if (!(scale > 0.0) || std::abs(l0 - l1) < kDegenerateLoop * scale) {
    throw DegeneracyError("degenerate loop transfer eigenvalues at qubit " +
                          std::to_string(base));
  }
  if (std::abs(l1) > std::abs(l0)) {
    std::swap(l0, l1);
    std::swap(v0, v1);
  }
  out.lambda_up = l0;
  out.lambda_down = l1;
  out.basis = detail::propagate(inst, base, v0, v1);
  return out;
}

namespace detail {

/// w_a = sum over configurations with the `position` bit equal to a of
/// conj(phi) times the product of the other states, so that
/// <phi| psi_1 (x) ... (x) v (x) ... = w . v.
inline Eigen::Vector2cd contraction(const Eigen::VectorXcd& phi,
                                    const std::vector<Eigen::Vector2cd>& others,
                                    std::size_t position) {
  const std::size_t k = others.size() + 1;
  Eigen::Vector2cd w = Eigen::Vector2cd::Zero();
  for (std::size_t x = 0; x < (std::size_t{1} << k); ++x) {
    cplx c = std::conj(phi(static_cast<Eigen::Index>(x)));
    std::size_t j = 0;
    for (std::size_t pos = 0; pos < k; ++pos) {
      if (pos == position) continue;
      c *= others[j++]((x >> (k - 1 - pos)) & 1);
    }
    w((x >> (k - 1 - position)) & 1) += c;
  }
  return w;
}

}  // namespace detail

/// State of the qubit at `position` that makes the product with the other
/// k-1 (fixed) states orthogonal to phi. `fixed` lists those states in
/// tuple order, skipping `position`.
inline Eigen::Vector2cd generalized_transfer(
    const Eigen::VectorXcd& phi, const std::vector<Eigen::Vector2cd>& fixed,
    std::size_t position) {
  const std::size_t k = fixed.size() + 1;
  if (static_cast<std::size_t>(phi.size()) != (std::size_t{1} << k)) {
    throw ValidationError("edge vector length does not match k = " +
                          std::to_string(k));
  }
  if (position >= k) throw ValidationError("dangling position out of range");
  std::vector<Eigen::Vector2cd> states;
  for (const auto& f : fixed) {
    const double nf = f.norm();
    if (!(nf > 0.0)) throw ValidationError("fixed state has zero norm");
    states.push_back(f / nf);
  }
  const Eigen::Vector2cd w = detail::contraction(phi, states, position);
  const double nw = w.norm();
  if (nw < kDegenerateContraction) {
    throw DegeneracyError("vanishing contraction in k-1 -> 1 transfer");
  }
  return Eigen::Vector2cd(w(1), -w(0)) / nw;
}

struct CoreSearchOptions {
  std::size_t sweeps = 2000;
  std::size_t restarts = 8;
  double tol = 1e-12;  ///< target energy on the listed edges
  std::uint64_t seed = 0;
};

struct CoreSearchResult {
  std::optional<ProductState> state;
  double energy = 0.0;  ///< best energy reached on the listed edges
  std::size_t sweeps = 0;
};

/// Searches for a product state annihilating the listed edges of a rank-1
/// instance by sweeping single qubits: with the others fixed, the energy is
/// a 2x2 Hermitian form in one factor, minimized by its lowest eigenvector.
inline CoreSearchResult search_product_state(
    const QsatInstance& inst, const std::vector<std::size_t>& edges,
    const CoreSearchOptions& opts = {}) {
  if (inst.rank() != 1) {
    throw ValidationError("product-state search needs rank r = 1");
  }
  const auto& g = inst.graph();
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> touching(g.n());
  std::vector<Qubit> qubits;
  for (auto e : edges) {
    for (std::size_t pos = 0; pos < g.edge(e).size(); ++pos) {
      touching[g.edge(e)[pos]].emplace_back(e, pos);
    }
  }
  for (Qubit q = 0; q < g.n(); ++q) {
    if (!touching[q].empty()) qubits.push_back(q);
  }
  auto others = [&](const ProductState& s, std::size_t e, std::size_t skip) {
    std::vector<Eigen::Vector2cd> out;
    for (std::size_t pos = 0; pos < g.edge(e).size(); ++pos) {
      if (pos != skip) out.push_back(s.factors[g.edge(e)[pos]]);
    }
    return out;
  };
  auto energy = [&](const ProductState& s) {
    double total = 0.0;
    for (auto e : edges) total += edge_energy(inst, s, e);
    return total;
  };

  CoreSearchResult best;
  best.energy = std::numeric_limits<double>::infinity();
  for (std::size_t attempt = 0; attempt < opts.restarts; ++attempt) {
    Rng rng(derive_seed(opts.seed, attempt));
    ProductState s = ProductState::all_zero(g.n());
    for (Qubit q : qubits) {
      Eigen::Vector2cd v;
      for (int a = 0; a < 2; ++a) {
        const double re = rng.normal();
        v(a) = cplx(re, rng.normal());
      }
      s.factors[q] = v.normalized();
    }
    double current = energy(s);
    for (std::size_t sweep = 0; sweep < opts.sweeps && current > opts.tol;
         ++sweep) {
      ++best.sweeps;
      for (Qubit q : qubits) {
        Eigen::Matrix2cd form = Eigen::Matrix2cd::Zero();
        for (auto [e, pos] : touching[q]) {
          const Eigen::Vector2cd w = detail::contraction(
              inst.frame(e).vectors.col(0), others(s, e, pos), pos);
          form += w.conjugate() * w.transpose();
        }
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> eig(form);
        s.factors[q] = eig.eigenvectors().col(0);
      }
      current = energy(s);
    }
    if (current < best.energy) {
      best.energy = current;
      best.state = s;
    }
    if (current <= opts.tol) break;
  }
  if (best.energy > opts.tol) best.state.reset();
  return best;
}

/// Satisfying product state obtained by restoring stripped leaf edges in
/// reverse order. A nonempty hypercore needs `core_state`, whose factors on
/// core qubits must already satisfy the core.
inline ProductState lift_product_state(
    const QsatInstance& inst,
    const std::optional<ProductState>& core_state = std::nullopt) {
  if (inst.rank() != 1) {
    throw ValidationError("lift_product_state needs rank r = 1");
  }
  const auto& g = inst.graph();
  const auto core = hypercore(g);
  ProductState out = ProductState::all_zero(g.n());
  std::vector<char> assigned(g.n(), 0);

  if (!core.core_edges.empty()) {
    if (!core_state) {
      throw ValidationError(
          "hypercore is nonempty (" + std::to_string(core.core_edges.size()) +
          " edges); a core state is required");
    }
    if (core_state->n() != g.n()) {
      throw ValidationError("core state has the wrong number of qubits");
    }
    double residual = 0.0;
    for (auto e : core.core_edges) residual += edge_energy(inst, *core_state, e);
    if (!(residual < kCoreResidualTol)) {
      throw ValidationError("core state residual " + std::to_string(residual) +
                            " exceeds tolerance");
    }
    for (auto e : core.core_edges) {
      for (Qubit q : g.edge(e)) {
        out.factors[q] = core_state->factors[q].normalized();
        assigned[q] = 1;
      }
    }
  }

  for (auto it = core.removal_order.rbegin(); it != core.removal_order.rend();
       ++it) {
    const auto e = *it;
    const Edge& edge = g.edge(e);
    std::size_t dangling = edge.size();
    for (std::size_t pos = 0; pos < edge.size(); ++pos) {
      if (!assigned[edge[pos]]) dangling = pos;
    }
    if (dangling == edge.size()) {
      throw Error("restored edge " + std::to_string(e) +
                  " has no free qubit");
    }
    std::vector<Eigen::Vector2cd> fixed;
    for (std::size_t pos = 0; pos < edge.size(); ++pos) {
      if (pos == dangling) continue;
      assigned[edge[pos]] = 1;
      fixed.push_back(out.factors[edge[pos]]);
    }
    try {
      out.factors[edge[dangling]] =
          generalized_transfer(inst.frame(e).vectors.col(0), fixed, dangling);
    } catch (const DegeneracyError&) {
      throw DegeneracyError("degenerate transfer while restoring edge " +
                            std::to_string(e));
    }
    assigned[edge[dangling]] = 1;
  }
  return out;
}

/// lift_product_state, first searching for a core state when the hypercore
/// is nonempty. Throws DegeneracyError when the search fails.
inline ProductState construct_product_state(const QsatInstance& inst,
                                            const CoreSearchOptions& opts = {}) {
  const auto core = hypercore(inst.graph());
  if (core.core_edges.empty()) return lift_product_state(inst);
  const auto found = search_product_state(inst, core.core_edges, opts);
  if (!found.state) {
    throw DegeneracyError("no product state found on the hypercore (" +
                          std::to_string(core.core_edges.size()) +
                          " edges, best energy " +
                          std::to_string(found.energy) + ")");
  }
  return lift_product_state(inst, found.state);
}

}  // namespace qsat
