#include <gtest/gtest.h>

#include "qsatlab/qsatlab.hpp"
#include "support.hpp"

using namespace qsat;

TEST(WeakBound, AlphaValues) {
  EXPECT_NEAR(alpha_weak_bound(2, 1), -1 / std::log2(0.75), 1e-15);
  EXPECT_NEAR(alpha_weak_bound(2, 1), 2.4094, 1e-4);
  EXPECT_NEAR(alpha_weak_bound(3, 1), 5.19089, 1e-5);
  EXPECT_EQ(alpha_weak_bound(3, 8), 0.0);
  EXPECT_THROW(alpha_weak_bound(3, 9), ValidationError);
  EXPECT_THROW(alpha_weak_bound(3, 0), ValidationError);
}

TEST(WeakBound, DimensionBound) {
  EXPECT_NEAR(weak_dim_bound(2, 1, 2, 1), std::log2(3.0), 1e-15);
  EXPECT_EQ(weak_dim_bound(10, 0, 2, 1), 10.0);
  EXPECT_EQ(weak_dim_bound(10, 3, 2, 4), -std::numeric_limits<double>::infinity());
  // Vanishes at m = alpha_wb n.
  EXPECT_NEAR(weak_dim_bound(100, 100 * alpha_weak_bound(3, 2), 3, 2), 0.0, 1e-10);
}

TEST(SubgraphCount, SingleEdgeGivesAlphaN) {
  for (double n : {10.0, 1e3, 1e6}) {
    for (double alpha : {0.1, 0.75, 2.0}) {
      const CountingQuery q{n, ensemble_edge_probability(n, alpha), 2, 1, 2};
      EXPECT_NEAR(expected_subgraph_count(q), alpha * n, 1e-9 * alpha * n);
    }
  }
}

TEST(SubgraphCount, TriangleMatchesBruteForceOverAllGraphs) {
  // Average number of triangles over all 2^10 graphs on 5 vertices.
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < 5; ++a) {
    for (int b = a + 1; b < 5; ++b) pairs.emplace_back(a, b);
  }
  auto bit = [&](int a, int b) {
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (pairs[i] == std::make_pair(std::min(a, b), std::max(a, b))) return i;
    }
    return pairs.size();
  };
  double total = 0;
  for (unsigned mask = 0; mask < 1024; ++mask) {
    for (int a = 0; a < 5; ++a) {
      for (int b = a + 1; b < 5; ++b) {
        for (int c = b + 1; c < 5; ++c) {
          total += (mask >> bit(a, b) & 1) && (mask >> bit(b, c) & 1) && (mask >> bit(a, c) & 1);
        }
      }
    }
  }
  EXPECT_DOUBLE_EQ(total / 1024, 1.25);
  EXPECT_NEAR(expected_subgraph_count({5, 0.5, 3, 3, 6}), 1.25, 1e-12);
}

TEST(SubgraphCount, KFoldDescriptorEqualsDirectFormula) {
  for (double n : {100.0, 1e4, 1e6}) {
    for (double K : {1.0, 3.0, 10.0}) {
      for (double L : {4.0, 6.0, 10.0}) {
        const double p = ensemble_edge_probability(n, 0.8);
        const double a = expected_subgraph_log_count(figure_eight_query(n, p, K, L));
        const double b = figure_eight_log_count(n, p, K, L);
        // Both sum terms of size log n!; rounding is relative to that.
        EXPECT_NEAR(a, b, 16 * std::numeric_limits<double>::epsilon() * std::lgamma(n + 1));
      }
    }
  }
}

TEST(SubgraphCount, RejectsBadQueries) {
  EXPECT_THROW(expected_subgraph_count({4, 0.5, 5, 4, 1}), ValidationError);
  EXPECT_THROW(expected_subgraph_count({4, 0.0, 2, 1, 1}), ValidationError);
  EXPECT_THROW(figure_eight_log_count(10, 0.1, 2, 6), ValidationError);
}

TEST(Entropy, ReferencePointIsPositive) {
  const double s = figure_eight_entropy(1e6, 0.75, 1e3, 1e2);
  EXPECT_NEAR(s, 1.05356e4, 1.0);
}

TEST(Entropy, AtHalfOnlyTheSubleadingTermRemains) {
  for (double K : {1.0, 10.0, 100.0}) {
    const double s = figure_eight_entropy(1e8, 0.5, K, 10);
    EXPECT_LT(s, 0.0);
  }
}

TEST(Entropy, GrowsWithNAboveOneHalf) {
  // With K = n^0.9 and L = n^0.05 the K log n penalty dominates until
  // n^0.05 outgrows log n, somewhere past n = 1e40.
  EXPECT_LT(figure_eight_entropy(1e21, 0.75, std::pow(1e21, 0.9), std::pow(1e21, 0.05)), 0.0);
  double prev = -std::numeric_limits<double>::infinity();
  for (double n : {1e60, 1e80, 1e100}) {
    const double s = figure_eight_entropy(n, 0.75, std::pow(n, 0.9), std::pow(n, 0.05));
    EXPECT_GT(s, prev);
    prev = s;
  }
  EXPECT_GT(prev, 0.0);
  EXPECT_THROW(figure_eight_entropy(100, 0.75, 5, 5), ValidationError);
}

TEST(Frustration, SmallGraphs) {
  const auto single = most_frustrated_classical(Hypergraph(2, 2, {{0, 1}}));
  EXPECT_EQ(single.min_count, 3u);
  // Square with a diagonal: brute force over all 4^5 clause choices leaves
  // at least one assignment.
  const Hypergraph chorded(4, 2, {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 2}});
  const auto f = most_frustrated_classical(chorded);
  EXPECT_EQ(f.min_count, 1u);
  EXPECT_EQ(count_classical_solutions(chorded, f.clauses), 1u);
  std::uint64_t brute = 16;
  for (std::size_t choice = 0; choice < 1024; ++choice) {
    std::vector<std::string> clauses;
    for (int e = 0; e < 5; ++e) clauses.push_back(clause_string(choice >> (2 * e) & 3, 2));
    brute = std::min(brute, count_classical_solutions(chorded, clauses));
  }
  EXPECT_EQ(brute, 1u);
  EXPECT_THROW(most_frustrated_classical(sample_hypergraph(20, 2, 1.0, EdgeModel::fixed_m, 1)),
               CapacityError);
}

TEST(Frustration, QuantumNeverExceedsClassicalMinimum) {
  int strict = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto g = sample_hypergraph(6, 2, 0.4 + 0.005 * static_cast<double>(s),
                                     EdgeModel::fixed_m, s);
    const auto quantum = kernel_dimension(build_instance(g, 1, s)).dimension;
    const auto classical = most_frustrated_classical(g).min_count;
    EXPECT_LE(quantum, classical) << "seed " << s;
    strict += quantum < classical;
  }
  EXPECT_GT(strict, 0);
}

TEST(Certificate, BowtieDumbbellAndK4) {
  const Hypergraph bowtie(5, 2, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}, {2, 4}});
  const Hypergraph dumbbell(7, 2, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {4, 6}});
  const Hypergraph k4(4, 2, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  for (const auto* g : {&bowtie, &dumbbell, &k4}) {
    const auto c = unsat_certificate_k2(*g);
    ASSERT_TRUE(c.verified.has_value());
    EXPECT_TRUE(*c.verified);
    EXPECT_EQ(count_classical_solutions(*g, c.clauses), 0u);
  }
}

TEST(Certificate, CertificateOnALargerRandomComponent) {
  int found = 0;
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto g = oracle::random_connected(14, 3, s);
    const auto c = unsat_certificate_k2(g);
    EXPECT_TRUE(c.verified.value_or(false));
    EXPECT_EQ(count_classical_solutions(g, c.clauses), 0u);
    ++found;
  }
  EXPECT_EQ(found, 30);
}

TEST(Certificate, ThetaGraphsHaveNone) {
  // A cycle with one chord is a theta graph: every classical clause choice
  // leaves a satisfying assignment, checked exhaustively.
  const auto eight = figure_eight_graph(4, 2);
  EXPECT_GE(most_frustrated_classical(eight).min_count, 1u);
  EXPECT_THROW(unsat_certificate_k2(eight), ValidationError);
  const Hypergraph theta(7, 2, {{0, 2}, {2, 1}, {0, 3}, {3, 4}, {4, 1}, {0, 5}, {5, 6}, {6, 1}});
  EXPECT_GE(most_frustrated_classical(theta).min_count, 1u);
  EXPECT_THROW(unsat_certificate_k2(theta), ValidationError);
}

TEST(Certificate, NeedsTwoCycles) {
  EXPECT_THROW(unsat_certificate_k2(cycle_graph(5)), ValidationError);
  EXPECT_THROW(unsat_certificate_k2(hyperchain(3, 2)), ValidationError);
}
