#include <gtest/gtest.h>

#include <cmath>

#include "fheston/quadrature.hpp"

using namespace fheston;

class GaussJacobiExactness : public ::testing::TestWithParam<double> {};

// int_0^1 r^beta r^m dr = 1 / (beta + m + 1), exact up to degree 2 * order - 1.
TEST_P(GaussJacobiExactness, MonomialsUpToDegree) {
  const double beta = GetParam();
  for (std::size_t order : {1u, 4u, 8u, 32u}) {
    const auto rule = gauss_jacobi_unit(order, beta);
    ASSERT_EQ(rule.nodes.size(), order);
    for (std::size_t m = 0; m < 2 * order; ++m) {
      double sum = 0.0;
      for (std::size_t i = 0; i < order; ++i) sum += rule.weights[i] * std::pow(rule.nodes[i], double(m));
      const double exact = 1.0 / (beta + double(m) + 1.0);
      EXPECT_NEAR(sum, exact, 1e-12 * (1.0 + exact)) << "order " << order << " degree " << m;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Betas, GaussJacobiExactness, ::testing::Values(-0.8, -0.4, 0.0, 0.4, 0.8));

TEST(GaussJacobi, NodesInsideUnitInterval) {
  const auto rule = gauss_jacobi_unit(32, -0.8);
  for (double x : rule.nodes) {
    EXPECT_GT(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
  for (double w : rule.weights) EXPECT_GT(w, 0.0);
}
