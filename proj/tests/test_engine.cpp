#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "fheston/engine.hpp"
#include "fheston/errors.hpp"

using namespace fheston;

namespace {

ExperimentSpec small_spec(const PayoffSpec& payoff, std::size_t paths, std::size_t estimates) {
  ExperimentSpec spec;
  spec.grid = GridSpec(50, 1.0);
  spec.payoff = payoff;
  spec.paths_per_estimate = paths;
  spec.num_estimates = estimates;
  spec.seed = 17;
  spec.estimator = Estimator::Both;
  return spec;
}

struct MeanSe {
  double mean;
  double se;
};

MeanSe mean_se(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / (n - 1) / n)};
}

}  // namespace

TEST(Summarize, TypeSevenQuartiles) {
  const std::vector<double> v{4.0, 1.0, 3.0, 2.0};
  const auto s = summarize(v);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.sd, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_DOUBLE_EQ(s.q1, 1.75);
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  EXPECT_DOUBLE_EQ(s.q3, 3.25);
  EXPECT_DOUBLE_EQ(s.min, 1.0);
  EXPECT_DOUBLE_EQ(s.max, 4.0);
  EXPECT_NEAR(s.cv, s.sd / 2.5, 1e-15);
}

TEST(Summarize, EdgeCases) {
  const std::vector<double> one{3.0};
  const auto s = summarize(one);
  EXPECT_EQ(s.sd, 0.0);
  EXPECT_EQ(s.median, 3.0);
  EXPECT_THROW(summarize(std::vector<double>{}), UsageError);
  EXPECT_TRUE(std::isnan(summarize(std::vector<double>{-1.0, 1.0}).cv));
}

TEST(PairwiseSum, ExactOnIntegers) {
  std::vector<double> v(1001);
  std::iota(v.begin(), v.end(), 0.0);
  EXPECT_EQ(pairwise_sum(v), 500500.0);
  EXPECT_EQ(pairwise_sum(std::vector<double>{}), 0.0);
}

TEST(ParallelFor, CoversRangeAndRethrows) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) ++hits[i];
  });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t b, std::size_t) {
                 if (b > 0) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}

TEST(Estimators, ConstantPayoff) {
  const auto spec = small_spec(PayoffSpec::constant(2.0), 4000, 1);
  const auto c = path_contributions(spec, 0, 4000, true, true);
  for (double x : c.naive) EXPECT_EQ(x, 2.0);
  const auto ms = mean_se(c.smoothed);
  EXPECT_NEAR(ms.mean, 2.0, 4 * ms.se);
  EXPECT_EQ(naive_estimate(spec, 0), 2.0);
}

TEST(Estimators, SmoothedRefusesVanishingSigma) {
  auto spec = small_spec(PayoffSpec::reference_call(), 10, 1);
  spec.sigma = SigmaSpec::linear(0.5);
  EXPECT_THROW(smoothed_estimate(spec, 0), InvalidSigmaError);
  EXPECT_NO_THROW(naive_estimate(spec, 0));
}

TEST(Estimators, WeightScale) {
  EXPECT_DOUBLE_EQ(smoothing_weight_scale(0.0), 1.0);
  EXPECT_NEAR(smoothing_weight_scale(0.6), 1.25, 1e-15);
  EXPECT_THROW(smoothing_weight_scale(1.0), DomainError);
}

// With correlated drivers the smoothed weight needs the 1/sqrt(1 - rho^2)
// factor for both estimators to target the same expectation.
TEST(Estimators, AgreeUnderCorrelation) {
  for (double rho : {-0.5, 0.5}) {
    auto spec = small_spec(PayoffSpec::reference_indicator(), 30000, 1);
    spec.params.rho = rho;
    spec.grid = GridSpec(32, 1.0);
    const auto c = path_contributions(spec, 0, 30000, true, true);
    const auto n = mean_se(c.naive), s = mean_se(c.smoothed);
    EXPECT_NEAR(n.mean, s.mean, 3.5 * std::hypot(n.se, s.se)) << rho;
  }
}

TEST(Estimators, CallMonotoneInStrike) {
  double previous = 1e300;
  for (double k : {0.5, 0.8, 1.0, 1.2, 2.0}) {
    const auto spec = small_spec(PayoffSpec::call(k), 2000, 1);
    const double v = naive_estimate(spec, 0);
    EXPECT_LE(v, previous);
    previous = v;
  }
}

TEST(RunExperiment, IndependentOfThreadCount) {
  const auto spec = small_spec(PayoffSpec::reference_staircase(), 200, 12);
  const auto a = run_experiment(spec, 1);
  const auto b = run_experiment(spec, 3);
  const auto c = run_experiment(spec, 8);
  EXPECT_EQ(a.naive, b.naive);
  EXPECT_EQ(a.smoothed, b.smoothed);
  EXPECT_EQ(a.smoothed, c.smoothed);
  for (std::size_t e = 0; e < 12; ++e) EXPECT_DOUBLE_EQ(a.smoothed[e], smoothed_estimate(spec, e));
}

TEST(RunExperiment, RejectsEmptyWork) {
  auto spec = small_spec(PayoffSpec::reference_call(), 0, 1);
  EXPECT_THROW(run_experiment(spec), UsageError);
  spec.paths_per_estimate = 10;
  spec.num_estimates = 0;
  EXPECT_THROW(run_experiment(spec), UsageError);
}

TEST(RunExperiment, WarnsInExploratoryRegime) {
  auto spec = small_spec(PayoffSpec::reference_call(), 20, 2);
  spec.params.hurst = 0.3;
  const auto r = run_experiment(spec, 1);
  ASSERT_FALSE(r.warnings.empty());
  EXPECT_NE(r.warnings[0].find("exploratory H regime"), std::string::npos);
}

TEST(Convergence, IdenticalLevelsHaveZeroError) {
  const std::vector<std::size_t> ladder{32, 32};
  const auto r = convergence_study(ModelParams{}, SigmaSpec::reference(), PayoffSpec::reference_call(), ladder, 100, 1);
  ASSERT_EQ(r.levels.size(), 2u);
  for (const auto& lv : r.levels) {
    EXPECT_EQ(lv.strong_err_l2, 0.0);
    EXPECT_EQ(lv.weak_err, 0.0);
  }
  EXPECT_TRUE(std::isnan(r.strong_slope));
}

TEST(Convergence, ConstantSigmaHasNoWeakError) {
  const std::vector<std::size_t> ladder{8, 16, 32, 64};
  const auto r = convergence_study(ModelParams{}, SigmaSpec::constant(0.3), PayoffSpec::reference_indicator(),
                                   ladder, 500, 2);
  for (const auto& lv : r.levels) EXPECT_NEAR(lv.weak_err, 0.0, 1e-12);
  EXPECT_GT(r.levels[0].strong_err_l2, r.levels[2].strong_err_l2);
}

TEST(Convergence, RejectsNonDyadicLadder) {
  const std::vector<std::size_t> bad{32, 48};
  EXPECT_THROW(convergence_study(ModelParams{}, SigmaSpec::reference(), PayoffSpec::reference_call(), bad, 10, 1),
               UsageError);
}

TEST(Convergence, IndependentOfThreadCount) {
  const std::vector<std::size_t> ladder{8, 16, 32};
  const auto a = convergence_study(ModelParams{}, SigmaSpec::reference(), PayoffSpec::reference_call(), ladder, 300, 4, 1);
  const auto b = convergence_study(ModelParams{}, SigmaSpec::reference(), PayoffSpec::reference_call(), ladder, 300, 4, 5);
  for (std::size_t l = 0; l < 3; ++l) {
    EXPECT_EQ(a.levels[l].strong_err_l2, b.levels[l].strong_err_l2);
    EXPECT_EQ(a.levels[l].weak_err, b.levels[l].weak_err);
  }
}
