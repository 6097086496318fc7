#pragma once

// QSAT instances: one rank-r projector frame per hyperedge and the
// matrix-free Hamiltonian H = sum_m Pi_m acting on 2^N amplitude vectors.
//
// Index conventions used throughout the library:
//  * global amplitude index x: qubit q holds bit (x >> q) & 1;
//  * frame index inside an edge (q_0 < ... < q_{k-1}): q_0 is the most
//    significant bit, so for k = 2 the frame reads (phi_00, phi_01,
//    phi_10, phi_11) with the first index on q_0.

#include <atomic>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qsatlab/error.hpp"
#include "qsatlab/hypergraph.hpp"
#include "qsatlab/io.hpp"
#include "qsatlab/rng.hpp"

namespace qsat {

using cplx = std::complex<double>;

inline constexpr double kFrameOrthonormalityTol = 1e-10;

/// r orthonormal vectors of C^(2^k); the projector is sum_a |phi^a><phi^a|.
struct ProjectorFrame {
  std::size_t edge_index = 0;
  Eigen::MatrixXcd vectors;  ///< 2^k rows, r columns

  int rank() const { return static_cast<int>(vectors.cols()); }

  /// max |<phi^a|phi^b> - delta_ab|
  double orthonormality_residual() const {
    const auto r = vectors.cols();
    return (vectors.adjoint() * vectors - Eigen::MatrixXcd::Identity(r, r))
        .cwiseAbs()
        .maxCoeff();
  }
};

class QsatInstance {
 public:
  QsatInstance() = default;

  QsatInstance(Hypergraph graph, int rank, std::vector<ProjectorFrame> frames,
               std::uint64_t seed)
      : graph_(std::move(graph)),
        rank_(rank),
        frames_(std::move(frames)),
        seed_(seed) {
    const auto dim = std::size_t{1} << graph_.k();
    if (rank_ < 1 || static_cast<std::size_t>(rank_) > dim) {
      throw ValidationError("rank r=" + std::to_string(rank_) +
                            " outside [1, 2^k]");
    }
    if (frames_.size() != graph_.m()) {
      throw ValidationError("instance has " + std::to_string(frames_.size()) +
                            " frames for " + std::to_string(graph_.m()) +
                            " edges");
    }
    for (std::size_t i = 0; i < frames_.size(); ++i) {
      const auto& f = frames_[i];
      if (f.edge_index != i) {
        throw ValidationError("frame " + std::to_string(i) +
                              " carries edge_index " +
                              std::to_string(f.edge_index));
      }
      if (static_cast<std::size_t>(f.vectors.rows()) != dim ||
          f.vectors.cols() != rank_) {
        throw ValidationError("frame " + std::to_string(i) +
                              " has the wrong shape");
      }
      if (!f.vectors.allFinite()) {
        throw ValidationError("frame " + std::to_string(i) +
                              " has non-finite amplitudes");
      }
      if (f.orthonormality_residual() > kFrameOrthonormalityTol) {
        throw ValidationError("frame " + std::to_string(i) +
                              " is not orthonormal");
      }
    }
  }

  const Hypergraph& graph() const { return graph_; }
  int rank() const { return rank_; }
  const std::vector<ProjectorFrame>& frames() const { return frames_; }
  const ProjectorFrame& frame(std::size_t i) const { return frames_[i]; }
  std::uint64_t seed() const { return seed_; }
  std::size_t n() const { return graph_.n(); }
  int k() const { return graph_.k(); }
  std::size_t m() const { return graph_.m(); }

 private:
  Hypergraph graph_;
  int rank_ = 1;
  std::vector<ProjectorFrame> frames_;
  std::uint64_t seed_ = 0;
};

/// Dense 2^N amplitude vector.
struct QuantumState {
  std::size_t n = 0;
  Eigen::VectorXcd amplitudes;

  static QuantumState zero(std::size_t n) {
    return {n, Eigen::VectorXcd::Zero(Eigen::Index{1} << n)};
  }
  double norm() const { return amplitudes.norm(); }
};

/// Tensor product of single-qubit states, one per qubit.
struct ProductState {
  std::vector<Eigen::Vector2cd> factors;

  static ProductState all_zero(std::size_t n) {
    return {std::vector<Eigen::Vector2cd>(n, Eigen::Vector2cd(1.0, 0.0))};
  }
  std::size_t n() const { return factors.size(); }

  QuantumState expand() const {
    QuantumState s = QuantumState::zero(n());
    for (Eigen::Index x = 0; x < s.amplitudes.size(); ++x) {
      cplx a = 1.0;
      for (std::size_t q = 0; q < n(); ++q) a *= factors[q]((x >> q) & 1);
      s.amplitudes(x) = a;
    }
    return s;
  }
};

// ---------------------------------------------------------------------------
// Frames

namespace detail {
inline std::atomic<std::uint64_t> frame_redraws{0};
}

/// Number of degenerate Gaussian draws re-drawn by sample_frame so far.
inline std::uint64_t frame_redraw_events() { return detail::frame_redraws; }

/// Haar-random r-frame in C^(2^k): complex Gaussian vectors orthonormalized
/// by twice-iterated Gram-Schmidt. A vector whose residual norm drops below
/// 1e-8 is re-drawn.
inline ProjectorFrame sample_frame(int k, int r, Rng& rng) {
  const Eigen::Index dim = Eigen::Index{1} << k;
  if (r < 1 || r > dim) {
    throw ValidationError("rank r=" + std::to_string(r) + " outside [1, 2^" +
                          std::to_string(k) + "]");
  }
  ProjectorFrame f;
  f.vectors.resize(dim, r);
  for (Eigen::Index a = 0; a < r; ++a) {
    for (;;) {
      Eigen::VectorXcd v(dim);
      for (Eigen::Index i = 0; i < dim; ++i) {
        const double re = rng.normal();
        const double im = rng.normal();
        v(i) = cplx(re, im);
      }
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index b = 0; b < a; ++b) {
          v -= f.vectors.col(b).dot(v) * f.vectors.col(b);
        }
      }
      const double norm = v.norm();
      if (norm < 1e-8) {
        ++detail::frame_redraws;
        std::clog << "qsatlab: degenerate Gaussian frame draw re-drawn\n";
        continue;
      }
      f.vectors.col(a) = v / norm;
      break;
    }
  }
  return f;
}

/// One independent Haar frame per edge; edge i uses the stream
/// derive_seed(seed, i).
inline QsatInstance build_instance(const Hypergraph& g, int r,
                                   std::uint64_t seed) {
  std::vector<ProjectorFrame> frames;
  frames.reserve(g.m());
  for (std::size_t i = 0; i < g.m(); ++i) {
    Rng rng(derive_seed(seed, i));
    frames.push_back(sample_frame(g.k(), r, rng));
    frames.back().edge_index = i;
  }
  return QsatInstance(g, r, std::move(frames), seed);
}

/// Frame index of a k-bit clause string such as "01" (first char = q_0).
inline std::size_t clause_index(const std::string& clause, int k) {
  if (clause.size() != static_cast<std::size_t>(k)) {
    throw ValidationError("clause '" + clause + "' does not have length k=" +
                          std::to_string(k));
  }
  std::size_t idx = 0;
  for (char c : clause) {
    if (c != '0' && c != '1') {
      throw ValidationError("clause '" + clause + "' is not a bit string");
    }
    idx = (idx << 1) | static_cast<std::size_t>(c - '0');
  }
  return idx;
}

inline std::string clause_string(std::size_t index, int k) {
  std::string s(static_cast<std::size_t>(k), '0');
  for (int j = 0; j < k; ++j) {
    if ((index >> (k - 1 - j)) & 1) s[static_cast<std::size_t>(j)] = '1';
  }
  return s;
}

/// Rank-1 instance whose projectors forbid one computational configuration
/// per edge.
inline QsatInstance classical_diagonal_instance(
    const Hypergraph& g, const std::vector<std::string>& clauses) {
  if (clauses.size() != g.m()) {
    throw ValidationError("need one clause per edge (" +
                          std::to_string(g.m()) + "), got " +
                          std::to_string(clauses.size()));
  }
  const Eigen::Index dim = Eigen::Index{1} << g.k();
  std::vector<ProjectorFrame> frames;
  for (std::size_t i = 0; i < g.m(); ++i) {
    ProjectorFrame f;
    f.edge_index = i;
    f.vectors = Eigen::MatrixXcd::Zero(dim, 1);
    f.vectors(static_cast<Eigen::Index>(clause_index(clauses[i], g.k())), 0) =
        1.0;
    frames.push_back(std::move(f));
  }
  return QsatInstance(g, 1, std::move(frames), g.seed());
}

/// The same instance on the listed qubits only (ascending), keeping the
/// listed edges (ascending). Relabelling is monotone, so tuple order, edge
/// order and frames all carry over unchanged.
inline QsatInstance restrict_instance(const QsatInstance& inst,
                                      const std::vector<Qubit>& qubits,
                                      const std::vector<std::size_t>& edges) {
  std::vector<Qubit> relabel(inst.n(), UINT32_MAX);
  for (std::size_t i = 0; i < qubits.size(); ++i) {
    relabel[qubits[i]] = static_cast<Qubit>(i);
  }
  std::vector<Edge> sub_edges;
  std::vector<ProjectorFrame> frames;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    Edge e;
    for (Qubit q : inst.graph().edge(edges[i])) {
      if (relabel[q] == UINT32_MAX) {
        throw ValidationError("restricted edge leaves the qubit subset");
      }
      e.push_back(relabel[q]);
    }
    sub_edges.push_back(std::move(e));
  }
  for (std::size_t i = 0; i < edges.size(); ++i) {
    ProjectorFrame f = inst.frame(edges[i]);
    f.edge_index = i;
    frames.push_back(std::move(f));
  }
  return QsatInstance(
      Hypergraph(qubits.size(), inst.k(), std::move(sub_edges),
                 inst.graph().seed()),
      inst.rank(), std::move(frames), inst.seed());
}

// ---------------------------------------------------------------------------
// Matrix-free Hamiltonian

namespace detail {

/// Global index offset of each local configuration of `qubits`.
inline std::vector<std::size_t> local_offsets(const std::vector<int>& bits) {
  const auto k = bits.size();
  std::vector<std::size_t> off(std::size_t{1} << k, 0);
  for (std::size_t loc = 0; loc < off.size(); ++loc) {
    for (std::size_t j = 0; j < k; ++j) {
      if ((loc >> (k - 1 - j)) & 1) off[loc] |= std::size_t{1} << bits[j];
    }
  }
  return off;
}

inline std::vector<int> bit_positions(const Edge& e) {
  return std::vector<int>(e.begin(), e.end());
}

inline std::size_t bit_mask(const std::vector<int>& bits) {
  std::size_t mask = 0;
  for (int b : bits) mask |= std::size_t{1} << b;
  return mask;
}

/// Calls f(base) for every index in [0, 2^n) with the `mask` bits clear.
template <typename F>
void for_each_base(std::size_t n, std::size_t mask, F&& f) {
  const std::size_t end = std::size_t{1} << n;
  std::size_t x = 0;
  do {
    f(x);
    x = ((x | mask) + 1) & ~mask;
  } while (x != 0 && x < end);
}

}  // namespace detail

/// out += Pi |in> for one projector acting on the given bit positions.
inline void add_projector(const Eigen::MatrixXcd& frame,
                          const std::vector<int>& bits, std::size_t n,
                          const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
  const auto off = detail::local_offsets(bits);
  const auto dim = static_cast<Eigen::Index>(off.size());
  Eigen::VectorXcd local(dim), image(dim), coeff(frame.cols());
  detail::for_each_base(n, detail::bit_mask(bits), [&](std::size_t base) {
    for (Eigen::Index l = 0; l < dim; ++l) local(l) = in(base + off[l]);
    coeff.noalias() = frame.adjoint() * local;
    image.noalias() = frame * coeff;
    for (Eigen::Index l = 0; l < dim; ++l) out(base + off[l]) += image(l);
  });
}

/// H |psi> without forming H.
inline QuantumState apply_h(const QsatInstance& inst,
                            const QuantumState& state) {
  if (state.n != inst.n() ||
      state.amplitudes.size() != (Eigen::Index{1} << inst.n())) {
    throw ValidationError("state has " + std::to_string(state.n) +
                          " qubits, instance has " + std::to_string(inst.n()));
  }
  QuantumState out = QuantumState::zero(inst.n());
  for (std::size_t i = 0; i < inst.m(); ++i) {
    add_projector(inst.frame(i).vectors,
                  detail::bit_positions(inst.graph().edge(i)), inst.n(),
                  state.amplitudes, out.amplitudes);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Instance file: {"n","k","r","seed","graph_seed","edges","frames"}
// (graph_seed optional), frames ordered as
// edges, each frame a list of r vectors of 2^k [re, im] pairs.

inline json frame_to_json(const Eigen::MatrixXcd& vectors) {
  json frame = json::array();
  for (Eigen::Index a = 0; a < vectors.cols(); ++a) {
    json v = json::array();
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      v.push_back(detail::complex_to_json(vectors(i, a)));
    }
    frame.push_back(std::move(v));
  }
  return frame;
}

inline json to_json(const QsatInstance& inst) {
  json frames = json::array();
  for (const auto& f : inst.frames()) frames.push_back(frame_to_json(f.vectors));
  return json{{"n", inst.n()},           {"k", inst.k()},
              {"r", inst.rank()},        {"seed", inst.seed()},
              {"graph_seed", inst.graph().seed()},
              {"edges", inst.graph().edges()}, {"frames", std::move(frames)}};
}

inline QsatInstance instance_from_json(const json& j) {
  using detail::field;
  using detail::get_as;
  const auto n = get_as<std::size_t>(field(j, "n", "instance"), "instance.n");
  const auto k = get_as<int>(field(j, "k", "instance"), "instance.k");
  const auto r = get_as<int>(field(j, "r", "instance"), "instance.r");
  const auto seed =
      get_as<std::uint64_t>(field(j, "seed", "instance"), "instance.seed");
  if (k < 2 || k > 20) throw ValidationError("instance.k out of range");
  const auto& ej = field(j, "edges", "instance");
  const auto& fj = field(j, "frames", "instance");
  if (!ej.is_array()) throw ParseError("instance.edges: expected an array");
  if (!fj.is_array()) throw ParseError("instance.frames: expected an array");
  if (ej.size() != fj.size()) {
    throw ValidationError("instance has " + std::to_string(ej.size()) +
                          " edges but " + std::to_string(fj.size()) +
                          " frames");
  }
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < ej.size(); ++i) {
    const std::string where = "instance.edges[" + std::to_string(i) + "]";
    auto e = get_as<Edge>(ej[i], where);
    if (!std::is_sorted(e.begin(), e.end()) ||
        std::adjacent_find(e.begin(), e.end()) != e.end()) {
      throw ValidationError(where + ": tuple not strictly increasing");
    }
    if (!edges.empty() && e < edges.back()) {
      throw ValidationError(where + ": edges not in canonical sorted order");
    }
    edges.push_back(std::move(e));
  }
  const Eigen::Index dim = Eigen::Index{1} << k;
  std::vector<ProjectorFrame> frames;
  for (std::size_t i = 0; i < fj.size(); ++i) {
    const std::string where = "instance.frames[" + std::to_string(i) + "]";
    if (!fj[i].is_array() || fj[i].size() != static_cast<std::size_t>(r)) {
      throw ParseError(where + ": expected " + std::to_string(r) + " vectors");
    }
    ProjectorFrame f;
    f.edge_index = i;
    f.vectors.resize(dim, r);
    for (int a = 0; a < r; ++a) {
      const auto& vj = fj[i][static_cast<std::size_t>(a)];
      const std::string vwhere = where + "[" + std::to_string(a) + "]";
      if (!vj.is_array() || vj.size() != static_cast<std::size_t>(dim)) {
        throw ParseError(vwhere + ": expected " + std::to_string(dim) +
                         " amplitudes");
      }
      for (Eigen::Index t = 0; t < dim; ++t) {
        f.vectors(t, a) = detail::complex_from_json(
            vj[static_cast<std::size_t>(t)],
            vwhere + "[" + std::to_string(t) + "]");
      }
    }
    frames.push_back(std::move(f));
  }
  const auto graph_seed =
      j.contains("graph_seed")
          ? get_as<std::uint64_t>(j.at("graph_seed"), "instance.graph_seed")
          : seed;
  return QsatInstance(Hypergraph(n, k, std::move(edges), graph_seed), r,
                      std::move(frames), seed);
}

inline json to_json(const ProductState& s) {
  json j = json::array();
  for (const auto& f : s.factors) {
    j.push_back(json::array(
        {detail::complex_to_json(f(0)), detail::complex_to_json(f(1))}));
  }
  return j;
}

inline ProductState product_state_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("product state: expected an array");
  ProductState s;
  for (std::size_t q = 0; q < j.size(); ++q) {
    const std::string where = "product_state[" + std::to_string(q) + "]";
    if (!j[q].is_array() || j[q].size() != 2) {
      throw ParseError(where + ": expected two amplitudes");
    }
    s.factors.emplace_back(detail::complex_from_json(j[q][0], where + "[0]"),
                           detail::complex_from_json(j[q][1], where + "[1]"));
  }
  return s;
}

}  // namespace qsat
