// Walks through the main entry points on small instances.

#include <iostream>

#include "qsatlab/qsatlab.hpp"

int main() {
  using namespace qsat;

  // A random 2-QSAT instance below the giant-component threshold.
  const auto g = sample_hypergraph(10, 2, 0.4, EdgeModel::poisson, 7);
  const auto inst = build_instance(g, 1, 8);
  const auto kernel = kernel_dimension(inst);
  std::cout << "n=10 k=2 M=" << g.m() << " verdict="
            << to_string(classify_satisfiability_k2(g)) << " D=" << kernel.dimension
            << " margin=" << kernel.margin << "\n";

  // A figure-eight: two independent cycles, so no zero-energy state.
  const auto eight = build_instance(figure_eight_graph(6, 2), 1, 9);
  const auto e = ground_state_energy(eight);
  std::cout << "figure-eight L=6: D=" << kernel_dimension(eight).dimension
            << " E0=" << e.e0 << " residual=" << e.residual << "\n";

  // 3-QSAT in the SAT phase: lift a product state through the leaf edges.
  const auto g3 = sample_hypergraph(30, 3, 0.5, EdgeModel::poisson, 11);
  const auto inst3 = build_instance(g3, 1, 12);
  const auto state = construct_product_state(inst3);
  std::cout << "k=3 n=30 M=" << g3.m() << " product-state energy "
            << verify_state(inst3, state) << "\n";

  std::cout << "alpha_wb(k=3, r=1) = " << alpha_weak_bound(3, 1) << "\n";
  return 0;
}
