#include "fheston/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fheston/cli/csv.hpp"
#include "fheston/drivers.hpp"
#include "fheston/engine.hpp"
#include "fheston/errors.hpp"
#include "fheston/model.hpp"
#include "fheston/rng.hpp"

namespace fheston::cli {

namespace {

namespace fs = std::filesystem;

std::ofstream open_output(const fs::path& dir, const char* name) {
  fs::create_directories(dir);
  std::ofstream f(dir / name, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + (dir / name).string() + "'");
  return f;
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  std::set<std::string> seen;
  for (const auto& w : warnings)
    if (seen.insert(w).second) err << "WARN: " << w << '\n';
}

void print_summary(std::ostream& out, const char* label, const EstimateSummary& s) {
  out << label << ": mean=" << format_number(s.mean) << " sd=" << format_number(s.sd)
      << " cv=" << format_number(s.cv) << " min=" << format_number(s.min) << " q1=" << format_number(s.q1)
      << " median=" << format_number(s.median) << " q3=" << format_number(s.q3) << " max=" << format_number(s.max)
      << '\n';
}

ExperimentSpec make_spec(const RunConfig& c, std::size_t n) {
  ExperimentSpec spec;
  spec.params = c.model;
  spec.grid = GridSpec(n, c.model.horizon);
  spec.sigma = c.sigma;
  spec.payoff = c.payoff;
  spec.paths_per_estimate = c.paths;
  spec.num_estimates = c.estimates;
  spec.seed = c.seed;
  spec.estimator = c.estimator;
  return spec;
}

// Collects PASS/FAIL lines for `validate`.
class Checklist {
 public:
  explicit Checklist(std::ostream& out) : out_(out) {}

  void check(bool ok, const std::string& name, const std::string& detail) {
    out_ << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
    failed_ = failed_ || !ok;
  }
  void info(const std::string& name, const std::string& detail) { out_ << "INFO " << name << ": " << detail << '\n'; }
  void skip(const std::string& name, const std::string& reason) { out_ << "SKIP " << name << ": " << reason << '\n'; }
  bool failed() const noexcept { return failed_; }

 private:
  std::ostream& out_;
  bool failed_ = false;
};

void check_fgn_covariance(const RunConfig& c, Checklist& list) {
  const GridSpec grid(c.validate.covariance_steps, c.model.horizon);
  const std::size_t n = grid.steps();
  const std::size_t paths = c.validate.covariance_paths;
  const Eigen::MatrixXd sigma = fgn_covariance(grid, c.model.hurst);

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  constexpr std::size_t kBatch = 1024;
  Eigen::MatrixXd batch(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kBatch));
  std::vector<double> sample(n);
  for (std::size_t first = 0; first < paths; first += kBatch) {
    const std::size_t count = std::min(kBatch, paths - first);
    for (std::size_t i = 0; i < count; ++i) {
      PathStream stream(c.seed, first + i, DriverId::FgnNoise);
      fgn_cholesky(grid, c.model.hurst, stream, sample);
      for (std::size_t k = 0; k < n; ++k) batch(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = sample[k];
    }
    const auto cols = batch.leftCols(static_cast<Eigen::Index>(count));
    gram.noalias() += cols * cols.transpose();
  }
  gram /= static_cast<double>(paths);

  const double tol = 4.0 * sigma.diagonal().maxCoeff() / std::sqrt(static_cast<double>(paths));
  const double worst = (gram - sigma).cwiseAbs().maxCoeff();
  list.check(worst <= tol, "fgn_covariance",
             "n=" + std::to_string(n) + " paths=" + std::to_string(paths) + " max|emp-exact|=" +
                 format_number(worst) + " tol=" + format_number(tol));

  const GridSpec half(n, c.model.horizon);
  const FgnFactor factor(half, 0.5);
  const double root = std::sqrt(half.delta());
  bool exact = true;
  for (Eigen::Index i = 0; i < factor.lower().rows(); ++i)
    for (Eigen::Index j = 0; j < factor.lower().cols(); ++j)
      exact = exact && factor.lower()(i, j) == (i == j ? root : 0.0);
  list.check(exact, "fgn_factor_H_half", "Cholesky factor equals sqrt(delta) I");
}

void check_isometry(const RunConfig& c, Checklist& list) {
  const std::size_t n = c.validate.isometry_steps;
  const double t = c.model.horizon;
  const double delta = t / static_cast<double>(n);
  const VolterraKernel kernel(c.model.hurst);
  const auto w = kernel.cell_weights(t, n, delta);
  double sum = 0.0;
  for (double x : w) sum += x * x * delta;
  const double target = std::pow(t, 2.0 * c.model.hurst);
  const double rel = std::abs(sum / target - 1.0);
  list.check(rel <= 0.02, "kernel_isometry",
             "n=" + std::to_string(n) + " sum w^2 delta / T^2H = " + format_number(sum / target));
}

void check_scheme(const RunConfig& c, Checklist& list) {
  PathStream stream(c.seed, 0, DriverId::FgnNoise);
  const double eps = std::numeric_limits<double>::epsilon();
  const double deltas[] = {1e-4, 1e-2, 1.0};
  double worst = 0.0;
  bool positive = true;
  double y = c.model.y0;
  for (std::size_t i = 0; i < c.validate.scheme_steps; ++i) {
    // Mostly large negative noise, spread over nine decades.
    const double magnitude = std::pow(10.0, -3.0 + 6.0 * stream.uniform());
    const double dBH = -magnitude * std::abs(stream.normal());
    const double delta = deltas[i % 3];
    const double next = inverse_euler_step(y, dBH, delta, c.model);
    positive = positive && next > 0.0 && std::isfinite(next);
    worst = std::max(worst, scheme_residual(y, next, dBH, delta, c.model));
    y = (i % 97 == 0) ? c.model.y0 : next;
  }
  list.check(positive, "scheme_positivity", std::to_string(c.validate.scheme_steps) + " adversarial steps");
  list.check(worst <= 10.0 * eps, "scheme_difference_equation",
             "max relative residual " + format_number(worst) + " (tol " + format_number(10.0 * eps) + ")");
}

void check_density(const RunConfig& c, Checklist& list) {
  if (c.sigma.lower_bound() <= 0.0) {
    list.skip("martingale_density", "sigma has no positive lower bound");
    return;
  }
  ModelParams p = c.model;
  p.lambda = p.mu;
  const PathSimulator sim(p, GridSpec(64, p.horizon), c.sigma, true);
  PathWorkspace ws;
  bool exact = true;
  for (std::uint64_t i = 0; i < 100; ++i) {
    sim.simulate(c.seed, i, ws);
    exact = exact && *ws.result.density == 1.0;
  }
  list.check(exact, "martingale_density", "lambda = mu gives density 1 on every path");
}

void check_moments(const RunConfig& c, Checklist& list, bool rates) {
  const GridSpec grid(c.validate.moment_steps, c.model.horizon);
  const DriverGenerator gen(grid, c.model.hurst, c.model.rho);
  std::vector<std::vector<double>> paths(c.validate.moment_paths);
  DriverIncrements d;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    gen.generate(c.seed, i, d);
    paths[i] = simulate_vol_path(d, grid, c.model);
  }
  const double p = c.validate.moment_order;
  const auto high = moment_diagnostics(paths, p, grid);
  const bool finite = std::isfinite(high.sup_moment) && std::isfinite(high.sup_inverse_moment);
  list.check(finite, "vol_moments",
             "p=" + format_number(p) + " sup E[Y^p]=" + format_number(high.sup_moment) +
                 " sup E[Y^-p]=" + format_number(high.sup_inverse_moment));
  if (!rates) {
    list.skip("increment_exponent", "exploratory H regime");
    return;
  }
  const auto second = moment_diagnostics(paths, 2.0, grid);
  const double h2 = 2.0 * c.model.hurst;
  list.check(std::abs(second.increment_exponent - h2) <= 0.3, "increment_exponent",
             "E|Y_t - Y_s|^2 ~ |t-s|^" + format_number(second.increment_exponent) + " (2H = " + format_number(h2) +
                 ")");
}

}  // namespace

int run_guarded(const std::function<int()>& command, std::ostream& err) {
  try {
    return command();
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidSigmaError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

int cmd_price(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const ExperimentSpec spec = make_spec(config, config.n);
  const ExperimentResult result = run_experiment(spec, config.threads);
  print_warnings(result.warnings, err);

  out << "payoff=" << spec.payoff.name() << " n=" << config.n << " paths=" << config.paths
      << " estimates=" << config.estimates << " seed=" << config.seed << '\n';
  if (result.naive_summary) print_summary(out, "naive", *result.naive_summary);
  if (result.smoothed_summary) print_summary(out, "smoothed", *result.smoothed_summary);

  if (config.write_estimates) {
    const fs::path dir(config.out_dir);
    auto summaries = open_output(dir, "summaries.csv");
    auto estimates = open_output(dir, "estimates.csv");
    summaries << kSummariesHeader << '\n';
    estimates << kEstimatesHeader << '\n';
    const auto& values = result.smoothed_summary ? result.smoothed : result.naive;
    write_summary_row(summaries, spec.payoff.name(), config.n, summarize(values));
    write_estimate_rows(estimates, spec.payoff.name(), config.n, values);
  }
  return kOk;
}

int cmd_tables(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const PayoffSpec payoffs[] = {PayoffSpec::reference_call(), PayoffSpec::reference_indicator(),
                                PayoffSpec::reference_staircase()};
  if (config.grid_sizes.empty()) throw UsageError("tables: grid_sizes is empty");
  if (!(config.scale > 0.0)) throw UsageError("tables: scale must be positive");
  const auto estimates = static_cast<std::size_t>(
      std::max(1.0, std::round(static_cast<double>(config.estimates) * config.scale)));

  const fs::path dir(config.out_dir);
  auto summaries = open_output(dir, "summaries.csv");
  auto raw = open_output(dir, "estimates.csv");
  summaries << kSummariesHeader << '\n';
  raw << kEstimatesHeader << '\n';

  std::vector<std::string> warnings;
  out << kSummariesHeader << '\n';
  for (std::size_t p = 0; p < std::size(payoffs); ++p) {
    for (std::size_t n : config.grid_sizes) {
      ExperimentSpec spec = make_spec(config, n);
      spec.payoff = payoffs[p];
      spec.num_estimates = estimates;
      spec.estimator = config.estimator == Estimator::Naive ? Estimator::Naive : Estimator::Smoothed;
      spec.seed = derive_seed(config.seed, p, n);
      const ExperimentResult result = run_experiment(spec, config.threads);
      warnings.insert(warnings.end(), result.warnings.begin(), result.warnings.end());
      const auto& values = spec.estimator == Estimator::Naive ? result.naive : result.smoothed;
      const auto& summary = spec.estimator == Estimator::Naive ? *result.naive_summary : *result.smoothed_summary;
      write_summary_row(summaries, payoffs[p].name(), n, summary);
      write_summary_row(out, payoffs[p].name(), n, summary);
      write_estimate_rows(raw, payoffs[p].name(), n, values);
    }
  }
  print_warnings(warnings, err);

  std::ofstream record(dir / "config.json", std::ios::binary);
  record << to_json_string(config);
  return kOk;
}

int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto warnings = config.model.validate();
  print_warnings(warnings, err);
  const bool rates = config.model.full_guarantee();
  Checklist list(out);

  check_fgn_covariance(config, list);
  if (rates)
    check_isometry(config, list);
  else
    list.skip("kernel_isometry", "exploratory H regime");

  const auto sv = sigma_validate(config.sigma, config.model.hurst);
  list.info("sigma", config.sigma.name() + " lower_bound=" + format_number(sv.lower_bound) +
                         " holder_exponent=" + format_number(sv.holder_exponent) +
                         " C_sigma=" + format_number(sv.assumption_constant) +
                         " rate=rH=" + format_number(sv.rate_exponent));
  if (!sv.conforming()) err << "WARN: sigma '" << config.sigma.name() << "' violates the regularity assumptions\n";
  list.check(!(config.sigma.requires_independent_drivers() && config.model.rho != 0.0), "sigma_admissible",
             config.sigma.requires_independent_drivers() ? "needs rho = 0" : "ok");

  const auto cond = parameter_condition(config.validate.moment_order, config.model);
  list.info("parameter_condition",
            "p=" + format_number(cond.order) + " bound=" + format_number(cond.bound) +
                " 3p+1<=bound: " + (cond.strict_holds ? "true" : "false") +
                " (margin " + format_number(cond.strict_margin) + ")" +
                " p+1<=bound: " + (cond.inverse_moment_holds ? "true" : "false") +
                " (margin " + format_number(cond.inverse_moment_margin) + ")");
  if (!cond.strict_holds)
    err << "WARN: parameter condition fails for p=" << format_number(cond.order) << " (margin "
        << format_number(cond.strict_margin) << ")\n";

  check_scheme(config, list);
  check_density(config, list);
  check_moments(config, list, rates);

  out << (list.failed() ? "validation FAILED\n" : "validation passed\n");
  return list.failed() ? kValidationFailure : kOk;
}

int cmd_converge(const RunConfig& config, std::ostream& out, std::ostream& err) {
  print_warnings(config.model.validate(), err);
  const auto report = convergence_study(config.model, config.sigma, config.payoff, config.converge.ladder,
                                        config.converge.paths, config.seed, config.threads);
  auto csv = open_output(fs::path(config.out_dir), "convergence.csv");
  csv << kConvergenceHeader << '\n';
  write_convergence_rows(csv, report);
  out << kConvergenceHeader << '\n';
  write_convergence_rows(out, report);
  out << "strong_slope=" << format_number(report.strong_slope)
      << " strong_sup_slope=" << format_number(report.strong_sup_slope)
      << " weak_slope=" << format_number(report.weak_slope) << '\n';
  return kOk;
}

}  // namespace fheston::cli
