#pragma once

// Monte-Carlo orchestration: naive and smoothed price estimators, batch
// statistics and coupled-ladder convergence studies.
//
// Output never depends on the number of worker threads. Each path draws from
// its own counter-based streams, per-path contributions are stored by index,
// and reductions follow a fixed pairwise tree.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fheston/contracts.hpp"
#include "fheston/drivers.hpp"
#include "fheston/model.hpp"

namespace fheston {

enum class Estimator { Naive, Smoothed, Both };

std::string to_string(Estimator e);
Estimator estimator_from_string(const std::string& s);

struct ExperimentSpec {
  ModelParams params;
  GridSpec grid{100, 1.0};
  SigmaSpec sigma = SigmaSpec::reference();
  PayoffSpec payoff = PayoffSpec::reference_call();
  std::size_t paths_per_estimate = 1000;
  std::size_t num_estimates = 1000;
  std::uint64_t seed = 0;
  Estimator estimator = Estimator::Smoothed;
};

struct EstimateSummary {
  double mean = 0.0;
  double sd = 0.0;
  double cv = 0.0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Mean, unbiased sd, cv = sd / mean, and type-7 quartiles (linear
/// interpolation between order statistics). Throws UsageError on empty input.
EstimateSummary summarize(std::span<const double> values);

/// Pairwise sum with a fixed reduction tree.
double pairwise_sum(std::span<const double> values) noexcept;

struct ExperimentResult {
  std::vector<double> naive;     // one entry per estimate, empty unless requested
  std::vector<double> smoothed;  // likewise
  std::optional<EstimateSummary> naive_summary;
  std::optional<EstimateSummary> smoothed_summary;
  std::vector<std::string> warnings;
};

/// Worker count from FHESTON_THREADS, else the hardware concurrency.
unsigned default_thread_count();

/// Calls body(begin, end) on contiguous chunks of [0, count) across up to
/// `threads` workers (0 = default_thread_count()). Rethrows the first error.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

/// Weight multiplying Z-hat_T / T in the smoothed estimator: 1 / sqrt(1 - rho^2).
/// Throws DomainError for |rho| = 1.
double smoothing_weight_scale(double rho);

/// (1/N) sum f(S-hat_T) over the paths of estimate `estimate_index`.
double naive_estimate(const ExperimentSpec& spec, std::size_t estimate_index, unsigned threads = 1);

/// (1/N) sum F(S-hat_T)/S-hat_T (1 + Z-hat_T / (T sqrt(1 - rho^2))).
/// Throws InvalidSigmaError when sigma has no positive lower bound.
double smoothed_estimate(const ExperimentSpec& spec, std::size_t estimate_index, unsigned threads = 1);

/// Per-path naive and smoothed contributions for paths [first, first + count).
struct PathContributions {
  std::vector<double> naive;
  std::vector<double> smoothed;
};
PathContributions path_contributions(const ExperimentSpec& spec, std::uint64_t first_path, std::size_t count,
                                     bool naive, bool smoothed, unsigned threads = 1);

/// num_estimates independent estimates and their summaries. Deterministic in
/// spec.seed for any thread count.
ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned threads = 0);

struct ConvergenceLevel {
  std::size_t n = 0;
  double delta = 0.0;
  double strong_err_l2 = 0.0;      // (mean |Y^n_T - Y^fine_T|^2)^{1/2}
  double strong_err_sup_l2 = 0.0;  // max over fine grid points, piecewise-constant coarse path
  double weak_err = 0.0;           // |mean(smoothed^n) - mean(smoothed^fine)|
};

struct ConvergenceReport {
  std::vector<ConvergenceLevel> levels;  // ascending n; last is the reference
  double strong_slope = 0.0;             // log-log slope of strong_err_l2 against delta
  double strong_sup_slope = 0.0;
  double weak_slope = 0.0;
};

/// Coupled-ladder study: fine-grid drivers are block-summed onto each coarser
/// grid and every level is compared against the finest. Each n in `ladder`
/// must divide the next one (UsageError otherwise). Slopes are NaN when fewer
/// than two levels have a non-zero error.
ConvergenceReport convergence_study(const ModelParams& params, const SigmaSpec& sigma, const PayoffSpec& payoff,
                                    std::span<const std::size_t> ladder, std::size_t paths, std::uint64_t seed,
                                    unsigned threads = 0);

}  // namespace fheston
