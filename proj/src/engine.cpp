#include "fheston/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "fheston/errors.hpp"

namespace fheston {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Paths per reduction block in the convergence study; fixed so that block
// partial sums do not depend on the worker count.
constexpr std::size_t kConvergenceBlock = 64;

double quantile_type7(std::span<const double> sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double fit_loglog_slope(const std::vector<double>& deltas, const std::vector<double>& errors) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (errors[i] > 0.0 && std::isfinite(errors[i])) {
      xs.push_back(std::log(deltas[i]));
      ys.push_back(std::log(errors[i]));
    }
  }
  if (xs.size() < 2) return kNaN;
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

void aggregate(const DriverIncrements& fine, std::size_t block, DriverIncrements& coarse) {
  const std::size_t n = fine.size() / block;
  coarse.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    double v = 0.0, vt = 0.0, w = 0.0, b = 0.0;
    for (std::size_t i = k * block; i < (k + 1) * block; ++i) {
      v += fine.dV[i];
      vt += fine.dVtilde[i];
      w += fine.dW[i];
      b += fine.dBH[i];
    }
    coarse.dV[k] = v;
    coarse.dVtilde[k] = vt;
    coarse.dW[k] = w;
    coarse.dBH[k] = b;
  }
}

}  // namespace

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::Naive:
      return "naive";
    case Estimator::Smoothed:
      return "smoothed";
    case Estimator::Both:
      return "both";
  }
  return "smoothed";
}

Estimator estimator_from_string(const std::string& s) {
  if (s == "naive") return Estimator::Naive;
  if (s == "smoothed") return Estimator::Smoothed;
  if (s == "both") return Estimator::Both;
  throw UsageError("unknown estimator '" + s + "' (expected naive, smoothed or both)");
}

double pairwise_sum(std::span<const double> values) noexcept {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

EstimateSummary summarize(std::span<const double> values) {
  if (values.empty()) throw UsageError("summarize: no estimates");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  EstimateSummary s;
  const double n = static_cast<double>(values.size());
  s.mean = pairwise_sum(values) / n;
  if (values.size() > 1) {
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - s.mean) * (values[i] - s.mean);
    s.sd = std::sqrt(pairwise_sum(sq) / (n - 1.0));
  }
  s.cv = s.mean != 0.0 ? s.sd / s.mean : kNaN;
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = quantile_type7(sorted, 0.25);
  s.median = quantile_type7(sorted, 0.5);
  s.q3 = quantile_type7(sorted, 0.75);
  return s;
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("FHESTON_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  if (count == 0) return;
  if (threads == 0) threads = default_thread_count();
  const std::size_t workers = std::min<std::size_t>(threads, count);
  if (workers <= 1) {
    body(0, count);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(count, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&, begin, end] {
        try {
          body(begin, end);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

double smoothing_weight_scale(double rho) {
  const double rho_bar = std::sqrt(1.0 - rho * rho);
  if (!(rho_bar > 0.0)) throw DomainError("smoothed estimator needs |rho| < 1");
  return 1.0 / rho_bar;
}

PathContributions path_contributions(const ExperimentSpec& spec, std::uint64_t first_path, std::size_t count,
                                     bool naive, bool smoothed, unsigned threads) {
  double weight_scale = 0.0;
  if (smoothed) {
    if (!(spec.sigma.lower_bound() > 0.0))
      throw InvalidSigmaError("smoothed estimator needs sigma bounded away from zero (sigma_min > 0)");
    weight_scale = smoothing_weight_scale(spec.params.rho) / spec.params.horizon;
  }

  const PathSimulator simulator(spec.params, spec.grid, spec.sigma);
  PathContributions out;
  if (naive) out.naive.resize(count);
  if (smoothed) out.smoothed.resize(count);

  parallel_for(count, threads, [&](std::size_t begin, std::size_t end) {
    PathWorkspace ws;
    for (std::size_t i = begin; i < end; ++i) {
      simulator.simulate(spec.seed, first_path + i, ws);
      const double s = ws.result.price;
      if (naive) out.naive[i] = spec.payoff(s);
      if (smoothed) out.smoothed[i] = spec.payoff.antiderivative(s) / s * (1.0 + ws.result.z_weight * weight_scale);
    }
  });
  return out;
}

double naive_estimate(const ExperimentSpec& spec, std::size_t estimate_index, unsigned threads) {
  const auto c = path_contributions(spec, estimate_index * spec.paths_per_estimate, spec.paths_per_estimate, true,
                                    false, threads);
  return pairwise_sum(c.naive) / static_cast<double>(spec.paths_per_estimate);
}

double smoothed_estimate(const ExperimentSpec& spec, std::size_t estimate_index, unsigned threads) {
  const auto c = path_contributions(spec, estimate_index * spec.paths_per_estimate, spec.paths_per_estimate, false,
                                    true, threads);
  return pairwise_sum(c.smoothed) / static_cast<double>(spec.paths_per_estimate);
}

ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned threads) {
  if (spec.paths_per_estimate == 0) throw UsageError("paths per estimate must be at least 1");
  if (spec.num_estimates == 0) throw UsageError("number of estimates must be at least 1");

  ExperimentResult result;
  result.warnings = spec.params.validate();
  if (spec.params.full_guarantee()) {
    const auto cond = parameter_condition(32.0, spec.params);
    if (!cond.strict_holds)
      result.warnings.push_back("parameter condition 3p+1 <= 2 kappa/(nu^2 H T^{2H-1}) fails for p=32 (margin " +
                                std::to_string(cond.strict_margin) + "); the error bound is not guaranteed");
  }
  const auto validation = sigma_validate(spec.sigma, spec.params.hurst);
  if (!validation.conforming())
    result.warnings.push_back("sigma '" + spec.sigma.name() + "' violates the regularity assumptions");

  const bool want_naive = spec.estimator != Estimator::Smoothed;
  const bool want_smoothed = spec.estimator != Estimator::Naive;
  const std::size_t n_paths = spec.paths_per_estimate;
  const auto contributions =
      path_contributions(spec, 0, spec.num_estimates * n_paths, want_naive, want_smoothed, threads);

  auto reduce = [&](const std::vector<double>& per_path) {
    std::vector<double> estimates(spec.num_estimates);
    for (std::size_t e = 0; e < spec.num_estimates; ++e)
      estimates[e] = pairwise_sum(std::span(per_path).subspan(e * n_paths, n_paths)) / static_cast<double>(n_paths);
    return estimates;
  };
  if (want_naive) {
    result.naive = reduce(contributions.naive);
    result.naive_summary = summarize(result.naive);
  }
  if (want_smoothed) {
    result.smoothed = reduce(contributions.smoothed);
    result.smoothed_summary = summarize(result.smoothed);
  }
  return result;
}

ConvergenceReport convergence_study(const ModelParams& params, const SigmaSpec& sigma, const PayoffSpec& payoff,
                                    std::span<const std::size_t> ladder, std::size_t paths, std::uint64_t seed,
                                    unsigned threads) {
  if (ladder.empty()) throw UsageError("convergence ladder is empty");
  if (paths == 0) throw UsageError("convergence study needs at least one path");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (ladder[i] == 0) throw UsageError("ladder levels must be positive");
    if (i > 0 && (ladder[i] < ladder[i - 1] || ladder[i] % ladder[i - 1] != 0))
      throw UsageError("ladder must be dyadic: each level must divide the next");
  }
  params.validate();

  const std::size_t levels = ladder.size();
  const std::size_t n_fine = ladder.back();
  const GridSpec fine_grid(n_fine, params.horizon);
  const DriverGenerator generator(fine_grid, params.hurst, params.rho);

  const bool weak_available = sigma.lower_bound() > 0.0 && std::abs(params.rho) < 1.0;
  const double weight_scale = weak_available ? smoothing_weight_scale(params.rho) / params.horizon : 0.0;

  struct Block {
    std::vector<double> sq_terminal;   // per level
    std::vector<double> weak_diff;     // per level
    std::vector<double> sq_path;       // per level x (n_fine + 1)
  };
  const std::size_t n_blocks = (paths + kConvergenceBlock - 1) / kConvergenceBlock;
  std::vector<Block> blocks(n_blocks);

  parallel_for(n_blocks, threads, [&](std::size_t b_begin, std::size_t b_end) {
    DriverIncrements fine, coarse;
    std::vector<std::vector<double>> vol(levels);
    std::vector<double> smoothed(levels);
    PathResult price;
    for (std::size_t b = b_begin; b < b_end; ++b) {
      Block& acc = blocks[b];
      acc.sq_terminal.assign(levels, 0.0);
      acc.weak_diff.assign(levels, 0.0);
      acc.sq_path.assign(levels * (n_fine + 1), 0.0);
      const std::size_t first = b * kConvergenceBlock;
      const std::size_t last = std::min(paths, first + kConvergenceBlock);
      for (std::size_t p = first; p < last; ++p) {
        generator.generate(seed, p, fine);
        for (std::size_t l = 0; l < levels; ++l) {
          const GridSpec grid(ladder[l], params.horizon);
          const DriverIncrements* drivers = &fine;
          if (ladder[l] != n_fine) {
            aggregate(fine, n_fine / ladder[l], coarse);
            drivers = &coarse;
          }
          vol[l].resize(ladder[l] + 1);
          simulate_vol_path(drivers->dBH, grid, params, vol[l]);
          if (weak_available) {
            simulate_price_terminal(*drivers, vol[l], grid, params, sigma, price);
            smoothed[l] = payoff.antiderivative(price.price) / price.price * (1.0 + price.z_weight * weight_scale);
          }
        }
        const auto& ref = vol[levels - 1];
        for (std::size_t l = 0; l < levels; ++l) {
          const double d = vol[l].back() - ref.back();
          acc.sq_terminal[l] += d * d;
          if (weak_available) acc.weak_diff[l] += smoothed[l] - smoothed[levels - 1];
          const std::size_t m = n_fine / ladder[l];
          for (std::size_t i = 0; i <= n_fine; ++i) {
            const double e = vol[l][i / m] - ref[i];
            acc.sq_path[l * (n_fine + 1) + i] += e * e;
          }
        }
      }
    }
  });

  ConvergenceReport report;
  std::vector<double> deltas, strong, strong_sup, weak;
  const double inv_paths = 1.0 / static_cast<double>(paths);
  for (std::size_t l = 0; l < levels; ++l) {
    double sq = 0.0, wd = 0.0;
    std::vector<double> path_sq(n_fine + 1, 0.0);
    for (const Block& blk : blocks) {
      sq += blk.sq_terminal[l];
      wd += blk.weak_diff[l];
      for (std::size_t i = 0; i <= n_fine; ++i) path_sq[i] += blk.sq_path[l * (n_fine + 1) + i];
    }
    ConvergenceLevel lv;
    lv.n = ladder[l];
    lv.delta = params.horizon / static_cast<double>(ladder[l]);
    lv.strong_err_l2 = std::sqrt(sq * inv_paths);
    lv.strong_err_sup_l2 = std::sqrt(*std::max_element(path_sq.begin(), path_sq.end()) * inv_paths);
    lv.weak_err = weak_available ? std::abs(wd * inv_paths) : kNaN;
    report.levels.push_back(lv);
    if (l + 1 < levels) {
      deltas.push_back(lv.delta);
      strong.push_back(lv.strong_err_l2);
      strong_sup.push_back(lv.strong_err_sup_l2);
      weak.push_back(lv.weak_err);
    }
  }
  report.strong_slope = fit_loglog_slope(deltas, strong);
  report.strong_sup_slope = fit_loglog_slope(deltas, strong_sup);
  report.weak_slope = fit_loglog_slope(deltas, weak);
  return report;
}

}  // namespace fheston
