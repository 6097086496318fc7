#include <gtest/gtest.h>

#include "qsatlab/qsatlab.hpp"
#include "support.hpp"

using namespace qsat;

TEST(Frames, OrthonormalForEveryShape) {
  Rng rng(1);
  for (int k = 2; k <= 4; ++k) {
    for (int r = 1; r <= (1 << k); ++r) {
      const auto f = sample_frame(k, r, rng);
      EXPECT_EQ(f.vectors.rows(), 1 << k);
      EXPECT_EQ(f.rank(), r);
      EXPECT_LT(f.orthonormality_residual(), 1e-12);
    }
  }
  EXPECT_THROW(sample_frame(2, 5, rng), ValidationError);
  EXPECT_THROW(sample_frame(2, 0, rng), ValidationError);
}

TEST(Frames, HaarMomentsOfARank1Frame) {
  // For a Haar unit vector in C^d, E|v_0|^2 = 1/d and E|v_0|^4 = 2/(d(d+1)).
  Rng rng(2);
  const int draws = 40000;
  double m2 = 0, m4 = 0;
  for (int i = 0; i < draws; ++i) {
    const double a = std::norm(sample_frame(3, 1, rng).vectors(0, 0));
    m2 += a;
    m4 += a * a;
  }
  EXPECT_NEAR(m2 / draws, 1.0 / 8, 0.003);
  EXPECT_NEAR(m4 / draws, 2.0 / 72, 0.002);
}

TEST(Instance, ValidatesFrames) {
  Hypergraph g(3, 2, {{0, 1}});
  ProjectorFrame f;
  f.vectors = Eigen::MatrixXcd::Zero(4, 1);
  f.vectors(0, 0) = 2.0;
  EXPECT_THROW(QsatInstance(g, 1, {f}, 0), ValidationError);
  f.vectors(0, 0) = 1.0;
  EXPECT_NO_THROW(QsatInstance(g, 1, {f}, 0));
  f.edge_index = 1;
  EXPECT_THROW(QsatInstance(g, 1, {f}, 0), ValidationError);
  EXPECT_THROW(QsatInstance(g, 1, {}, 0), ValidationError);
  EXPECT_THROW(build_instance(g, 5, 0), ValidationError);
}

TEST(Instance, BuildIsDeterministic) {
  const auto g = sample_hypergraph(10, 3, 0.8, EdgeModel::poisson, 3);
  const auto a = build_instance(g, 2, 17);
  const auto b = build_instance(g, 2, 17);
  const auto c = build_instance(g, 2, 18);
  for (std::size_t i = 0; i < g.m(); ++i) {
    EXPECT_EQ(a.frame(i).vectors, b.frame(i).vectors);
    EXPECT_NE(a.frame(i).vectors, c.frame(i).vectors);
  }
}

TEST(Hamiltonian, ApplyMatchesElementwiseOracle) {
  Rng rng(5);
  for (int k = 2; k <= 3; ++k) {
    for (int r : {1, 2}) {
      const auto g = sample_hypergraph(7, k, 0.9, EdgeModel::poisson, 10 + k + r);
      const auto inst = build_instance(g, r, 20 + k + r);
      const Eigen::MatrixXcd h = oracle::hamiltonian(inst);
      EXPECT_LT((dense_hamiltonian(inst) - h).norm(), 1e-12);
      QuantumState s{7, oracle::random_vector(rng, 128)};
      EXPECT_LT((apply_h(inst, s).amplitudes - h * s.amplitudes).norm(), 1e-12);
    }
  }
}

TEST(Hamiltonian, QubitOrderConvention) {
  // Clause "01" on (0, 1) penalizes qubit 0 = 0, qubit 1 = 1, i.e. global
  // index 2 (bit q holds qubit q).
  const auto inst = classical_diagonal_instance(Hypergraph(2, 2, {{0, 1}}), {"01"});
  EXPECT_EQ(inst.frame(0).vectors(1, 0), cplx(1.0));
  const auto h = dense_hamiltonian(inst);
  EXPECT_EQ(h(2, 2), cplx(1.0));
  EXPECT_EQ(h.diagonal().sum(), cplx(1.0));
}

TEST(Hamiltonian, ProjectorsAreIdempotent) {
  const auto inst = build_instance(Hypergraph(3, 3, {{0, 1, 2}}), 3, 4);
  const auto h = dense_hamiltonian(inst);
  EXPECT_LT((h * h - h).norm(), 1e-12);
  EXPECT_NEAR(h.trace().real(), 3.0, 1e-12);
}

TEST(Hamiltonian, ClassicalDiagonalCountsViolations) {
  const Hypergraph g(3, 2, {{0, 1}, {1, 2}});
  const auto inst = classical_diagonal_instance(g, {"11", "10"});
  const auto h = dense_hamiltonian(inst);
  for (std::size_t x = 0; x < 8; ++x) {
    const int q0 = x & 1, q1 = (x >> 1) & 1, q2 = (x >> 2) & 1;
    const double expected = (q0 == 1 && q1 == 1) + (q1 == 1 && q2 == 0);
    EXPECT_EQ(h(x, x).real(), expected);
  }
  EXPECT_THROW(classical_diagonal_instance(g, {"11"}), ValidationError);
  EXPECT_THROW(classical_diagonal_instance(g, {"11", "1x"}), ValidationError);
}

TEST(Hamiltonian, RejectsMismatchedState) {
  const auto inst = build_instance(cycle_graph(4), 1, 1);
  EXPECT_THROW(apply_h(inst, QuantumState::zero(3)), ValidationError);
}

TEST(ProductStates, ExpandIsKroneckerProduct) {
  Rng rng(8);
  ProductState p;
  for (int q = 0; q < 3; ++q) p.factors.push_back(oracle::random_qubit(rng));
  const auto s = p.expand();
  for (std::size_t x = 0; x < 8; ++x) {
    const cplx expected =
        p.factors[0](x & 1) * p.factors[1]((x >> 1) & 1) * p.factors[2]((x >> 2) & 1);
    EXPECT_LT(std::abs(s.amplitudes(x) - expected), 1e-15);
  }
}

TEST(Restrict, KeepsFramesAndRelabels) {
  const auto g = Hypergraph(6, 2, {{1, 3}, {3, 5}, {0, 2}});
  const auto inst = build_instance(g, 1, 2);
  const auto comps = connected_components(g);
  const auto sub = restrict_instance(inst, comps.qubits[1], comps.edges[1]);
  EXPECT_EQ(sub.n(), 3u);
  EXPECT_EQ(sub.graph().edges(), (std::vector<Edge>{{0, 1}, {1, 2}}));
  EXPECT_EQ(sub.frame(0).vectors, inst.frame(1).vectors);
  EXPECT_EQ(sub.frame(1).vectors, inst.frame(2).vectors);
}

TEST(InstanceJson, RoundTripIsExact) {
  const auto g = sample_hypergraph(9, 3, 0.7, EdgeModel::poisson, 4);
  const auto inst = build_instance(g, 2, 5);
  const auto text = dump_json(to_json(inst));
  const auto back = instance_from_json(parse_json_text(text));
  EXPECT_EQ(back.graph(), inst.graph());
  EXPECT_EQ(back.rank(), 2);
  for (std::size_t i = 0; i < inst.m(); ++i) {
    EXPECT_EQ(back.frame(i).vectors, inst.frame(i).vectors);
  }
  EXPECT_EQ(dump_json(to_json(back)), text);
}

TEST(InstanceJson, ErrorsNameTheField) {
  auto j = to_json(build_instance(Hypergraph(3, 2, {{0, 1}, {1, 2}}), 1, 1));
  auto broken = j;
  broken["frames"][1][0][2] = "x";
  try {
    instance_from_json(broken);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("instance.frames[1][0][2]"), std::string::npos);
  }
  broken = j;
  broken["edges"] = json::array({json::array({1, 2}), json::array({0, 1})});
  EXPECT_THROW(instance_from_json(broken), ValidationError);
  broken = j;
  broken.erase("r");
  EXPECT_THROW(instance_from_json(broken), ParseError);
  broken = j;
  broken["frames"][0][0][0] = json::array({3.0, 0.0});
  EXPECT_THROW(instance_from_json(broken), ValidationError);
}

TEST(ProductStateJson, RoundTrip) {
  Rng rng(3);
  ProductState p;
  for (int q = 0; q < 4; ++q) p.factors.push_back(oracle::random_qubit(rng));
  const auto back = product_state_from_json(parse_json_text(to_json(p).dump()));
  ASSERT_EQ(back.n(), 4u);
  for (int q = 0; q < 4; ++q) EXPECT_EQ(back.factors[q], p.factors[q]);
  EXPECT_THROW(product_state_from_json(parse_json_text("[[1]]")), ParseError);
}
