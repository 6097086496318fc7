#pragma once

// Exact satisfying-subspace dimension by incremental kernel intersection,
// ground-state energy by restarted Lanczos, and residual checks of
// candidate zero-energy states.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "qsatlab/error.hpp"
#include "qsatlab/hypergraph.hpp"
#include "qsatlab/instance.hpp"
#include "qsatlab/io.hpp"

namespace qsat {

inline constexpr double kCleanMargin = 10.0;

struct KernelOptions {
  double tol_factor = 100.0;
  std::size_t max_qubits = 16;
  bool keep_basis = false;
  /// Refuse basis export beyond this many complex entries (2^N * D).
  std::size_t max_basis_entries = std::size_t{1} << 26;
  /// Explicit projector insertion order (a permutation of edge indices).
  /// Default: component by component, each grown from its first edge.
  std::optional<std::vector<std::size_t>> edge_order;
};

struct KernelReport {
  std::uint64_t dimension = 0;
  /// D_0 = 2^N, then D_m after the m-th inserted projector.
  std::vector<std::uint64_t> trajectory;
  /// Edge index inserted at each step.
  std::vector<std::size_t> order;
  double tol_factor = 100.0;
  /// Largest absolute singular-value threshold applied in any step.
  double threshold = 0.0;
  /// min over steps of (smallest kept singular value) / (largest singular
  /// value treated as zero); +inf when no step had to separate the two.
  double margin = std::numeric_limits<double>::infinity();
  std::size_t low_margin_steps = 0;
  /// Orthonormal kernel basis, 2^N x D, when requested.
  std::optional<Eigen::MatrixXcd> basis;

  bool ill_conditioned() const { return margin < kCleanMargin; }
};

namespace detail {

/// Kernel of the projectors seen so far restricted to a set of touched
/// qubits; local bit j of `basis` rows is qubit `qubits[j]`.
struct KernelBlock {
  std::vector<Qubit> qubits;
  Eigen::MatrixXcd basis;

  Eigen::Index dim() const { return basis.cols(); }
};

/// Tensor product; `a` keeps the low bits.
inline KernelBlock kron(const KernelBlock& a, const KernelBlock& b) {
  KernelBlock out;
  out.qubits = a.qubits;
  out.qubits.insert(out.qubits.end(), b.qubits.begin(), b.qubits.end());
  const Eigen::Index ra = a.basis.rows(), rb = b.basis.rows();
  out.basis.resize(ra * rb, a.dim() * b.dim());
  for (Eigen::Index j = 0; j < b.dim(); ++j) {
    for (Eigen::Index i = 0; i < a.dim(); ++i) {
      auto col = out.basis.col(i + a.dim() * j);
      for (Eigen::Index h = 0; h < rb; ++h) {
        col.segment(h * ra, ra) = b.basis(h, j) * a.basis.col(i);
      }
    }
  }
  return out;
}

/// Adds an unconstrained qubit as the new high bit; doubles the dimension.
inline void extend(KernelBlock& block, Qubit q) {
  const Eigen::Index rows = block.basis.rows(), d = block.dim();
  Eigen::MatrixXcd grown = Eigen::MatrixXcd::Zero(2 * rows, 2 * d);
  grown.topLeftCorner(rows, d) = block.basis;
  grown.bottomRightCorner(rows, d) = block.basis;
  block.basis = std::move(grown);
  block.qubits.push_back(q);
}

struct ConstraintStep {
  double threshold = 0.0;
  double margin = std::numeric_limits<double>::infinity();
};

/// Restricts `block` to the subspace annihilated by the projector with
/// frame `frame` on local bit positions `bits`.
///
/// Constraint matrix rows are (rest configuration, frame vector) pairs and
/// columns are kernel basis vectors: A = <phi^a| (x) <rest| applied to the
/// basis. Its numerical null space (SVD, relative threshold) gives the
/// surviving combinations; the complement of the row space is taken with a
/// Householder QR and applied to the basis from the right.
inline ConstraintStep constrain(KernelBlock& block,
                                const Eigen::MatrixXcd& frame,
                                const std::vector<int>& bits,
                                double tol_factor) {
  ConstraintStep step;
  const Eigen::Index d = block.dim();
  if (d == 0) return step;
  const auto t = block.qubits.size();
  const auto off = local_offsets(bits);
  const auto local_dim = static_cast<Eigen::Index>(off.size());
  const Eigen::Index r = frame.cols();
  const Eigen::Index rest = Eigen::Index{1} << (t - bits.size());

  Eigen::MatrixXcd a(r * rest, d);
  Eigen::MatrixXcd gathered(local_dim, d);
  const Eigen::MatrixXcd frame_adj = frame.adjoint();
  Eigen::Index row = 0;
  for_each_base(t, bit_mask(bits), [&](std::size_t base) {
    for (Eigen::Index l = 0; l < local_dim; ++l) {
      gathered.row(l) = block.basis.row(static_cast<Eigen::Index>(base + off[l]));
    }
    a.middleRows(row, r).noalias() = frame_adj * gathered;
    row += r;
  });

  // One-sided Jacobi after a pivoted QR. Eigen 3.4's divide-and-conquer
  // SVD reads out of bounds while deflating matrices with many exact zero
  // singular values and then returns wrong ranks.
  Eigen::JacobiSVD<Eigen::MatrixXcd, Eigen::ColPivHouseholderQRPreconditioner> svd(
      a, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  step.threshold = tol_factor * smax * std::numeric_limits<double>::epsilon() *
                   static_cast<double>(std::max(a.rows(), a.cols()));
  Eigen::Index kept = 0;
  while (kept < sv.size() && sv(kept) > step.threshold) ++kept;
  if (kept > 0 && kept < sv.size() && sv(kept) > 0.0) {
    step.margin = sv(kept - 1) / sv(kept);
  }
  if (kept == 0) return step;
  if (kept == d) {
    block.basis.resize(block.basis.rows(), 0);
    return step;
  }
  // Only `kept` reflectors: B Q costs rows * d * kept. Eigen blocks the
  // left application, so work on B^dagger.
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(svd.matrixV().leftCols(kept));
  Eigen::MatrixXcd adj = block.basis.adjoint();
  adj.applyOnTheLeft(qr.householderQ().adjoint());
  block.basis = adj.bottomRows(d - kept).adjoint();
  return step;
}

}  // namespace detail

/// Default insertion order: components in order of their smallest qubit;
/// inside a component, repeatedly the lowest-index remaining edge that
/// touches an already covered qubit.
inline std::vector<std::size_t> growth_order(const Hypergraph& g) {
  const auto comps = connected_components(g);
  std::vector<std::size_t> order;
  order.reserve(g.m());
  std::vector<char> covered(g.n(), 0);
  for (const auto& edges : comps.edges) {
    std::vector<std::size_t> remaining = edges;
    while (!remaining.empty()) {
      auto pick = std::find_if(remaining.begin(), remaining.end(), [&](auto e) {
        return std::any_of(g.edge(e).begin(), g.edge(e).end(),
                           [&](Qubit q) { return covered[q] != 0; });
      });
      if (pick == remaining.end()) pick = remaining.begin();
      order.push_back(*pick);
      for (Qubit q : g.edge(*pick)) covered[q] = 1;
      remaining.erase(pick);
    }
  }
  return order;
}

/// dim ker(H), adding projectors one at a time and intersecting kernels.
inline KernelReport kernel_dimension(const QsatInstance& inst,
                                     const KernelOptions& opts = {}) {
  const auto& g = inst.graph();
  if (g.n() > opts.max_qubits) {
    throw CapacityError("kernel_dimension capped at N <= " +
                        std::to_string(opts.max_qubits) + " (got N=" +
                        std::to_string(g.n()) + ")");
  }
  KernelReport report;
  report.tol_factor = opts.tol_factor;
  report.order = opts.edge_order ? *opts.edge_order : growth_order(g);
  {
    auto sorted = report.order;
    std::sort(sorted.begin(), sorted.end());
    bool perm = sorted.size() == g.m();
    for (std::size_t i = 0; perm && i < sorted.size(); ++i) perm = sorted[i] == i;
    if (!perm) {
      throw ValidationError("edge_order is not a permutation of the edges");
    }
  }

  std::vector<std::optional<detail::KernelBlock>> blocks;
  std::vector<std::size_t> block_of(g.n(), SIZE_MAX);
  std::size_t untouched = g.n();
  bool empty = false;

  auto global_dimension = [&]() -> std::uint64_t {
    if (empty) return 0;
    std::uint64_t dim = std::uint64_t{1} << untouched;
    for (const auto& b : blocks) {
      if (b) dim *= static_cast<std::uint64_t>(b->dim());
    }
    return dim;
  };
  report.trajectory.push_back(global_dimension());

  for (auto e : report.order) {
    if (!empty) {
      const Edge& edge = g.edge(e);
      std::vector<std::size_t> ids;
      for (Qubit q : edge) {
        if (block_of[q] != SIZE_MAX) ids.push_back(block_of[q]);
      }
      std::sort(ids.begin(), ids.end());
      ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

      std::size_t target;
      if (ids.empty()) {
        target = blocks.size();
        detail::KernelBlock fresh;
        fresh.basis = Eigen::MatrixXcd::Ones(1, 1);
        blocks.emplace_back(std::move(fresh));
      } else {
        target = ids[0];
        for (std::size_t i = 1; i < ids.size(); ++i) {
          blocks[target] = detail::kron(*blocks[target], *blocks[ids[i]]);
          for (Qubit q : blocks[ids[i]]->qubits) block_of[q] = target;
          blocks[ids[i]].reset();
        }
      }
      auto& block = *blocks[target];
      for (Qubit q : edge) {
        if (block_of[q] == SIZE_MAX) {
          detail::extend(block, q);
          block_of[q] = target;
          --untouched;
        }
      }
      std::vector<int> bits;
      for (Qubit q : edge) {
        bits.push_back(static_cast<int>(
            std::find(block.qubits.begin(), block.qubits.end(), q) -
            block.qubits.begin()));
      }
      const auto step = detail::constrain(block, inst.frame(e).vectors, bits,
                                          opts.tol_factor);
      report.threshold = std::max(report.threshold, step.threshold);
      report.margin = std::min(report.margin, step.margin);
      report.low_margin_steps += step.margin < kCleanMargin;
      if (block.dim() == 0) empty = true;
    }
    report.trajectory.push_back(global_dimension());
  }
  report.dimension = report.trajectory.back();

  if (opts.keep_basis) {
    const std::size_t rows = std::size_t{1} << g.n();
    if (rows * report.dimension > opts.max_basis_entries) {
      throw CapacityError("kernel basis export exceeds " +
                          std::to_string(opts.max_basis_entries) +
                          " entries");
    }
    if (empty) {
      report.basis = Eigen::MatrixXcd(static_cast<Eigen::Index>(rows), 0);
    } else {
      detail::KernelBlock all;
      all.basis = Eigen::MatrixXcd::Ones(1, 1);
      for (const auto& b : blocks) {
        if (b) all = detail::kron(all, *b);
      }
      for (Qubit q = 0; q < g.n(); ++q) {
        if (block_of[q] == SIZE_MAX) detail::extend(all, q);
      }
      Eigen::MatrixXcd global(static_cast<Eigen::Index>(rows), all.dim());
      for (std::size_t y = 0; y < rows; ++y) {
        std::size_t x = 0;
        for (std::size_t j = 0; j < all.qubits.size(); ++j) {
          if ((y >> j) & 1) x |= std::size_t{1} << all.qubits[j];
        }
        global.row(static_cast<Eigen::Index>(x)) =
            all.basis.row(static_cast<Eigen::Index>(y));
      }
      report.basis = std::move(global);
    }
  }
  return report;
}

inline json to_json(const KernelReport& r, bool with_basis = false) {
  json j{{"D", r.dimension},
         {"trajectory", r.trajectory},
         {"order", r.order},
         {"tol_factor", r.tol_factor},
         {"threshold", r.threshold},
         {"margin", detail::number_or_null(r.margin)},
         {"low_margin_steps", r.low_margin_steps},
         {"ill_conditioned", r.ill_conditioned()}};
  if (with_basis && r.basis) j["basis"] = frame_to_json(*r.basis);
  return j;
}

// ---------------------------------------------------------------------------
// Weak UNSAT bound checks

struct WeakBoundCheck {
  /// Steps m (1-based) where D_m > D_{m-1} (1 - r/2^k) + 0.5.
  std::vector<std::size_t> step_violations;
  /// log2 of 2^N (1 - r/2^k)^M; -inf when r = 2^k and M > 0.
  double log2_bound = 0.0;
  bool final_ok = true;

  bool passed() const { return final_ok && step_violations.empty(); }
};

inline WeakBoundCheck check_weak_bound(const KernelReport& report, int k,
                                       int r) {
  if (report.trajectory.empty()) {
    throw ValidationError("kernel report has an empty trajectory");
  }
  const double factor = 1.0 - static_cast<double>(r) / std::ldexp(1.0, k);
  WeakBoundCheck check;
  for (std::size_t m = 1; m < report.trajectory.size(); ++m) {
    const double prev = static_cast<double>(report.trajectory[m - 1]);
    if (static_cast<double>(report.trajectory[m]) > prev * factor + 0.5) {
      check.step_violations.push_back(m);
    }
  }
  const double n = std::log2(static_cast<double>(report.trajectory.front()));
  const auto steps = static_cast<double>(report.trajectory.size() - 1);
  check.log2_bound =
      factor > 0.0 ? n + steps * std::log2(factor)
                   : (steps > 0 ? -std::numeric_limits<double>::infinity() : n);
  if (report.dimension > 0) {
    check.final_ok =
        std::log2(static_cast<double>(report.dimension)) <= check.log2_bound + 1e-9;
  }
  return check;
}

inline json to_json(const WeakBoundCheck& c) {
  return json{{"passed", c.passed()},
              {"final_ok", c.final_ok},
              {"log2_bound", detail::number_or_null(c.log2_bound)},
              {"step_violations", c.step_violations}};
}

// ---------------------------------------------------------------------------
// Ground-state energy

struct EnergyOptions {
  double tol = 1e-10;             ///< residual target ||H v - E v||
  std::size_t max_iter = 5000;    ///< operator applications per component
  std::size_t max_qubits = 20;
  std::size_t dense_cutoff = 256;  ///< dense eigensolver up to this dimension
  std::size_t krylov = 0;          ///< Lanczos basis size, 0 = automatic
  bool split_components = true;
  std::uint64_t start_seed = 0x51a7e5eedULL;
};

struct EnergyReport {
  double e0 = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = true;
};

inline json to_json(const EnergyReport& e) {
  return json{{"E0", e.e0},
              {"residual", e.residual},
              {"iterations", e.iterations},
              {"converged", e.converged}};
}

/// H as a dense matrix. Only sensible for small N.
inline Eigen::MatrixXcd dense_hamiltonian(const QsatInstance& inst) {
  const Eigen::Index dim = Eigen::Index{1} << inst.n();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  Eigen::VectorXcd unit = Eigen::VectorXcd::Zero(dim);
  Eigen::VectorXcd col(dim);
  for (Eigen::Index x = 0; x < dim; ++x) {
    unit(x) = 1.0;
    col.setZero();
    for (std::size_t i = 0; i < inst.m(); ++i) {
      add_projector(inst.frame(i).vectors,
                    detail::bit_positions(inst.graph().edge(i)), inst.n(), unit,
                    col);
    }
    h.col(x) = col;
    unit(x) = 0.0;
  }
  return h;
}

namespace detail {

inline EnergyReport dense_lowest(const QsatInstance& inst) {
  const Eigen::MatrixXcd h = dense_hamiltonian(inst);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h);
  EnergyReport rep;
  rep.e0 = eig.eigenvalues()(0);
  const Eigen::VectorXcd v = eig.eigenvectors().col(0);
  rep.residual = (h * v - rep.e0 * v).norm();
  rep.iterations = 1;
  rep.converged = true;
  return rep;
}

/// Lowest eigenpair by Lanczos with full reorthogonalization and thick
/// restart: each cycle keeps the lowest third of its Ritz vectors, so a
/// cluster of small eigenvalues does not stall convergence.
inline EnergyReport lanczos_lowest(const QsatInstance& inst,
                                   const EnergyOptions& opts) {
  const Eigen::Index dim = Eigen::Index{1} << inst.n();
  Eigen::Index m = static_cast<Eigen::Index>(opts.krylov);
  if (m == 0) {
    m = inst.n() <= 12 ? 120 : inst.n() <= 16 ? 80 : 24;
  }
  m = std::max<Eigen::Index>(std::min(m, dim), 2);
  const Eigen::Index keep = std::max<Eigen::Index>(m / 3, 1);

  std::vector<std::vector<int>> bits;
  for (const auto& e : inst.graph().edges()) bits.push_back(bit_positions(e));
  auto apply = [&](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
    out.setZero();
    for (std::size_t i = 0; i < inst.m(); ++i) {
      add_projector(inst.frame(i).vectors, bits[i], inst.n(), in, out);
    }
  };

  Rng rng(opts.start_seed);
  Eigen::VectorXcd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double re = rng.normal();
    v(i) = cplx(re, rng.normal());
  }
  v.normalize();

  EnergyReport rep;
  rep.converged = false;
  Eigen::MatrixXcd basis(dim, m + 1);
  basis.col(0) = v;
  // Projected operator, upper triangle filled from the Gram-Schmidt
  // coefficients; after a restart its leading block is diag(theta).
  Eigen::MatrixXcd proj = Eigen::MatrixXcd::Zero(m, m);
  Eigen::VectorXcd w(dim), hy(dim);
  Eigen::Index start = 0;
  while (rep.iterations < opts.max_iter) {
    Eigen::Index size = m;
    bool invariant = false;
    for (Eigen::Index j = start; j < m; ++j) {
      apply(basis.col(j), w);
      ++rep.iterations;
      Eigen::VectorXcd c = basis.leftCols(j + 1).adjoint() * w;
      w.noalias() -= basis.leftCols(j + 1) * c;
      const Eigen::VectorXcd again = basis.leftCols(j + 1).adjoint() * w;
      w.noalias() -= basis.leftCols(j + 1) * again;
      c += again;
      proj.col(j).head(j + 1) = c;
      const double b = w.norm();
      if (b < 1e-13 * (std::abs(c(j)) + 1.0)) {
        size = j + 1;
        invariant = true;
        break;
      }
      basis.col(j + 1) = w / b;
    }
    const Eigen::MatrixXcd t =
        proj.topLeftCorner(size, size).selfadjointView<Eigen::Upper>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(t);
    const double theta = eig.eigenvalues()(0);
    v = basis.leftCols(size) * eig.eigenvectors().col(0);
    v.normalize();
    apply(v, hy);
    ++rep.iterations;
    rep.e0 = theta;
    rep.residual = (hy - theta * v).norm();
    if (rep.residual <= opts.tol || invariant) {
      rep.converged = true;
      break;
    }
    // Thick restart: the lowest `keep` Ritz vectors, then the next Lanczos
    // vector, which is orthogonal to all of them.
    const Eigen::VectorXcd next = basis.col(m);
    const Eigen::MatrixXcd ritz = basis.leftCols(m) * eig.eigenvectors().leftCols(keep);
    basis.leftCols(keep) = ritz;
    basis.col(keep) = next;
    proj.setZero();
    for (Eigen::Index i = 0; i < keep; ++i) proj(i, i) = eig.eigenvalues()(i);
    start = keep;
  }
  return rep;
}

inline EnergyReport lowest_energy(const QsatInstance& inst,
                                  const EnergyOptions& opts) {
  if (inst.m() == 0) return {};
  if ((std::size_t{1} << inst.n()) <= opts.dense_cutoff) {
    return dense_lowest(inst);
  }
  return lanczos_lowest(inst, opts);
}

}  // namespace detail

/// Smallest eigenvalue of H. With split_components the problem separates
/// into independent connected components whose energies add.
inline EnergyReport ground_state_energy(const QsatInstance& inst,
                                        const EnergyOptions& opts = {}) {
  if (inst.n() > opts.max_qubits) {
    throw CapacityError("ground_state_energy capped at N <= " +
                        std::to_string(opts.max_qubits) + " (got N=" +
                        std::to_string(inst.n()) + ")");
  }
  if (!opts.split_components) return detail::lowest_energy(inst, opts);
  const auto comps = connected_components(inst.graph());
  EnergyReport total;
  for (std::size_t c = 0; c < comps.count(); ++c) {
    if (comps.edges[c].empty()) continue;
    const auto sub = restrict_instance(inst, comps.qubits[c], comps.edges[c]);
    const auto rep = detail::lowest_energy(sub, opts);
    total.e0 += rep.e0;
    total.residual += rep.residual;
    total.iterations += rep.iterations;
    total.converged = total.converged && rep.converged;
  }
  return total;
}

// ---------------------------------------------------------------------------
// State verification

/// <psi|H|psi> / <psi|psi>.
inline double verify_state(const QsatInstance& inst, const QuantumState& s) {
  const double norm2 = s.amplitudes.squaredNorm();
  if (!(norm2 > 0.0)) throw ValidationError("cannot verify a zero-norm state");
  const auto hs = apply_h(inst, s);
  return s.amplitudes.dot(hs.amplitudes).real() / norm2;
}

/// <Psi|Pi_e|Psi> for one edge of a product state, factors normalized.
inline double edge_energy(const QsatInstance& inst, const ProductState& s,
                          std::size_t e) {
  const Edge& edge = inst.graph().edge(e);
  Eigen::VectorXcd local = Eigen::VectorXcd::Ones(1);
  for (Qubit q : edge) {
    const double nq = s.factors[q].norm();
    if (!(nq > 0.0)) {
      throw ValidationError("product factor of qubit " + std::to_string(q) +
                            " has zero norm");
    }
    const Eigen::Vector2cd f = s.factors[q] / nq;
    Eigen::VectorXcd next(2 * local.size());
    for (Eigen::Index i = 0; i < local.size(); ++i) {
      next(2 * i) = local(i) * f(0);
      next(2 * i + 1) = local(i) * f(1);
    }
    local = std::move(next);
  }
  return (inst.frame(e).vectors.adjoint() * local).squaredNorm();
}

/// Energy of a product state, evaluated edge by edge without expanding it.
inline double verify_state(const QsatInstance& inst, const ProductState& s) {
  if (s.n() != inst.n()) {
    throw ValidationError("product state has " + std::to_string(s.n()) +
                          " qubits, instance has " + std::to_string(inst.n()));
  }
  double energy = 0.0;
  for (std::size_t e = 0; e < inst.m(); ++e) energy += edge_energy(inst, s, e);
  return energy;
}

}  // namespace qsat
