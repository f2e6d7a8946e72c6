#include "fheston/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "fheston/errors.hpp"

namespace fheston {

QuadratureRule gauss_jacobi_unit(std::size_t order, double beta) {
  if (order == 0) throw UsageError("gauss_jacobi_unit: order must be positive");
  if (!(beta > -1.0)) throw DomainError("gauss_jacobi_unit: beta must exceed -1");

  // Jacobi weight (1-x)^alpha (1+x)^beta on [-1, 1] with alpha = 0.
  const double a = 0.0;
  const double b = beta;
  const auto n = static_cast<Eigen::Index>(order);

  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double kk = static_cast<double>(k);
    const double s = 2.0 * kk + a + b;
    jacobi(k, k) = (k == 0) ? (b - a) / (a + b + 2.0) : (b * b - a * a) / (s * (s + 2.0));
    if (k + 1 < n) {
      const double m = kk + 1.0;
      const double t = 2.0 * m + a + b;
      const double off =
          std::sqrt(4.0 * m * (m + a) * (m + b) * (m + a + b) / (t * t * (t + 1.0) * (t - 1.0)));
      jacobi(k, k + 1) = off;
      jacobi(k + 1, k) = off;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  if (solver.info() != Eigen::Success) throw NumericalError("gauss_jacobi_unit: eigensolver failed");

  // mu0 = int_{-1}^{1} (1+x)^b dx; mapping x = 2r - 1 rescales by 2^{-(b+1)}.
  const double mu0 = std::pow(2.0, b + 1.0) / (b + 1.0);
  const double to_unit = std::pow(2.0, -(b + 1.0));

  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double v0 = solver.eigenvectors()(0, k);
    rule.nodes[static_cast<std::size_t>(k)] = 0.5 * (solver.eigenvalues()(k) + 1.0);
    rule.weights[static_cast<std::size_t>(k)] = mu0 * v0 * v0 * to_unit;
  }
  return rule;
}

}  // namespace fheston
