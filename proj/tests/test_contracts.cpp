#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fheston/contracts.hpp"
#include "fheston/errors.hpp"

using namespace fheston;

TEST(Sigma, ReferenceValues) {
  const auto s = SigmaSpec::reference();
  EXPECT_NEAR(s(0.0), 0.00792446596230556743, 1e-17);
  EXPECT_DOUBLE_EQ(s(0.99), 0.5);
  EXPECT_EQ(s.name(), "shifted_power");
  EXPECT_THROW(s(-0.1), DomainError);
}

TEST(Sigma, DerivativeMatchesFiniteDifference) {
  const auto s = SigmaSpec::reference();
  for (double x : {0.01, 0.3, 1.0, 7.0}) {
    const double h = 1e-6;
    EXPECT_NEAR(s.derivative(x), (s(x + h) - s(x - h)) / (2 * h), 1e-6);
  }
}

TEST(Sigma, LowerBoundHoldsOnRandomPoints) {
  std::mt19937_64 gen(123);
  std::exponential_distribution<double> dist(0.2);
  for (const auto& s : {SigmaSpec::reference(), SigmaSpec::constant(0.3), SigmaSpec::shifted_power(2.0, 0.5, 0.3)}) {
    const double lb = s.lower_bound();
    for (int i = 0; i < 100000; ++i) ASSERT_GE(s(dist(gen)), lb);
  }
}

TEST(Sigma, ValidationOfReference) {
  const auto v = sigma_validate(SigmaSpec::reference(), 0.7);
  EXPECT_TRUE(v.conforming());
  EXPECT_NEAR(v.lower_bound, 0.00792446596230556743, 1e-17);
  EXPECT_DOUBLE_EQ(v.holder_exponent, 0.9);
  EXPECT_NEAR(v.rate_exponent, 0.63, 1e-15);
  EXPECT_LE(v.holder_sweep_max_ratio, v.holder_constant * (1 + 1e-9));
  EXPECT_GT(v.holder_sweep_pairs, 1000u);
}

TEST(Sigma, LinearIsNotConforming) {
  const auto s = SigmaSpec::linear(0.5);
  EXPECT_TRUE(s.requires_independent_drivers());
  const auto v = sigma_validate(s, 0.7);
  EXPECT_FALSE(v.conforming());
  EXPECT_FALSE(v.lower_bound_ok);
}

TEST(Sigma, RejectsInvalidParameters) {
  EXPECT_THROW(SigmaSpec::shifted_power(0.5, 0.0, 0.9), DomainError);
  EXPECT_THROW(SigmaSpec::shifted_power(0.5, 0.01, 1.0), DomainError);
  EXPECT_THROW(SigmaSpec::constant(0.0), DomainError);
}

TEST(Payoff, StaircaseExamples) {
  const auto f = PayoffSpec::reference_staircase();
  EXPECT_DOUBLE_EQ(f(1.6), 2.0);
  EXPECT_DOUBLE_EQ(f.antiderivative(1.6), 1.45);
  EXPECT_DOUBLE_EQ(f(0.5), 0.0);
  EXPECT_DOUBLE_EQ(f(10.0), 3.5);
  EXPECT_EQ(f.discontinuities(), (std::vector<double>{0.5, 1.0, 1.5, 2.0, 2.5, 3.0}));
}

TEST(Payoff, CallAndIndicator) {
  const auto call = PayoffSpec::reference_call();
  EXPECT_DOUBLE_EQ(call(1.5), 0.5);
  EXPECT_DOUBLE_EQ(call(0.5), 0.0);
  EXPECT_DOUBLE_EQ(call.antiderivative(3.0), 2.0);
  EXPECT_DOUBLE_EQ(call.antiderivative(0.7), 0.0);

  const auto ind = PayoffSpec::reference_indicator();
  EXPECT_DOUBLE_EQ(ind(0.5), 1.0);
  EXPECT_DOUBLE_EQ(ind(1.0), 1.0);
  EXPECT_DOUBLE_EQ(ind(1.0000001), 0.0);
  EXPECT_DOUBLE_EQ(ind(0.4999999), 0.0);
  EXPECT_DOUBLE_EQ(ind.antiderivative(0.75), 0.25);
  EXPECT_DOUBLE_EQ(ind.antiderivative(4.0), 0.5);

  const auto open = PayoffSpec::indicator(0.5, 1.0, false, false);
  EXPECT_DOUBLE_EQ(open(0.5), 0.0);
  EXPECT_DOUBLE_EQ(open(1.0), 0.0);
}

TEST(Payoff, PiecewiseLinearAndConstant) {
  const auto f = PayoffSpec::piecewise_linear({0.0, 1.0}, {0.0, 2.0}, {1.0, 0.0});
  EXPECT_DOUBLE_EQ(f(0.5), 0.5);
  EXPECT_DOUBLE_EQ(f(3.0), 2.0);
  EXPECT_DOUBLE_EQ(f.antiderivative(2.0), 2.5);
  EXPECT_EQ(f.discontinuities(), (std::vector<double>{1.0}));
  const auto c = PayoffSpec::constant(3.0);
  EXPECT_DOUBLE_EQ(c(7.0), 3.0);
  EXPECT_DOUBLE_EQ(c.antiderivative(2.0), 6.0);
  EXPECT_THROW(PayoffSpec::piecewise_linear({0.5}, {1.0}, {0.0}), DomainError);
}

TEST(Payoff, AntiderivativeDerivativeIsPayoff) {
  const PayoffSpec payoffs[] = {PayoffSpec::reference_call(), PayoffSpec::reference_indicator(),
                                PayoffSpec::reference_staircase(),
                                PayoffSpec::piecewise_linear({0.0, 1.0, 2.0}, {1.0, 0.0, 3.0}, {-1.0, 2.0, 0.5})};
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> dist(0.01, 10.0);
  const double h = 1e-6;
  for (const auto& f : payoffs) {
    const auto jumps = f.discontinuities();
    for (int i = 0; i < 2000; ++i) {
      const double x = dist(gen);
      const bool near_jump = std::any_of(jumps.begin(), jumps.end(), [&](double j) { return std::abs(x - j) < 1e-4; });
      if (near_jump || std::abs(x - 1.0) < 1e-4) continue;
      const double fd = (f.antiderivative(x + h) - f.antiderivative(x - h)) / (2 * h);
      ASSERT_NEAR(fd, f(x), 1e-6) << f.name() << " at " << x;
    }
  }
}

TEST(Payoff, GrowthBounds) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> dist(0.0, 50.0);
  for (const auto& f : {PayoffSpec::reference_call(), PayoffSpec::reference_indicator(),
                        PayoffSpec::reference_staircase()}) {
    const auto g = f.growth_bound();
    for (int i = 0; i < 10000; ++i) {
      const double x = dist(gen);
      ASSERT_LE(f(x), g.constant * (1 + std::pow(x, g.power)));
    }
  }
  EXPECT_DOUBLE_EQ(PayoffSpec::reference_staircase().growth_bound().constant, 3.5);
}

TEST(Payoff, Names) {
  EXPECT_EQ(PayoffSpec::reference_call().name(), "call");
  EXPECT_EQ(PayoffSpec::reference_indicator().name(), "indicator");
  EXPECT_EQ(PayoffSpec::reference_staircase().name(), "staircase");
}
