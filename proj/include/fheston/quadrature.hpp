#pragma once

#include <cstddef>
#include <vector>

namespace fheston {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Jacobi rule on [0, 1] for the weight r^beta (beta > -1), i.e.
///   sum_i weights[i] * g(nodes[i])  ~=  int_0^1 r^beta g(r) dr,
/// exact for polynomials g of degree < 2 * order. beta = 0 gives
/// Gauss-Legendre. Nodes come from the Golub-Welsch eigenvalue problem.
QuadratureRule gauss_jacobi_unit(std::size_t order, double beta);

}  // namespace fheston
