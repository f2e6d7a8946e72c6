#include "fheston/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fheston/errors.hpp"

namespace fheston {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(name) + " must be positive and finite");
}

// Least-squares slope of ys against xs.
double fit_slope(std::span<const double> xs, std::span<const double> ys) {
  const auto n = static_cast<double>(xs.size());
  if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
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

}  // namespace

std::vector<std::string> ModelParams::validate() const {
  if (!std::isfinite(mu)) throw DomainError("mu must be finite");
  require_positive(kappa, "kappa");
  require_positive(theta, "theta");
  require_positive(nu, "nu");
  require_positive(s0, "S0");
  require_positive(y0, "Y0");
  require_positive(horizon, "T");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be non-negative");
  if (!(rho >= -1.0 && rho <= 1.0)) throw DomainError("rho must lie in [-1, 1]");
  if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("Hurst index must lie in (0, 1)");

  std::vector<std::string> warnings;
  if (!full_guarantee()) {
    if (rho != 0.0) throw DomainError("correlated drivers need 1/2 < H < 1 (Volterra representation)");
    warnings.emplace_back("exploratory H regime (H <= 1/2): convergence and moment guarantees do not apply");
  }
  return warnings;
}

double ModelParams::fixed_point() const noexcept { return std::sqrt(kappa / theta); }

double ModelParams::discount_factor() const noexcept { return std::exp(-lambda * horizon); }

double inverse_euler_step(double y_prev, double dBH, double delta, const ModelParams& params) noexcept {
  const double a = y_prev + 0.5 * params.nu * dBH;
  const double denom = 2.0 + params.theta * delta;
  const double c = params.kappa * delta * denom;
  const double root = std::hypot(a, std::sqrt(c));
  // For a < 0 the sum a + root cancels; use the conjugate form instead.
  if (a >= 0.0) return (a + root) / denom;
  return c / (denom * (root - a));
}

double scheme_residual(double y_prev, double y_next, double dBH, double delta, const ModelParams& params) noexcept {
  using L = long double;
  const L drift_in = L{0.5} * L{params.kappa} * L{delta} / L{y_next};
  const L drift_out = L{0.5} * L{params.theta} * L{delta} * L{y_next};
  const L noise = L{0.5} * L{params.nu} * L{dBH};
  const L r = L{y_next} - L{y_prev} - drift_in + drift_out - noise;
  const L scale = std::abs(L{y_next}) + std::abs(L{y_prev}) + std::abs(drift_in) + std::abs(drift_out) + std::abs(noise);
  return static_cast<double>(std::abs(r) / scale);
}

void simulate_vol_path(std::span<const double> dBH, const GridSpec& grid, const ModelParams& params,
                       std::span<double> out) {
  const std::size_t n = grid.steps();
  if (dBH.size() != n || out.size() != n + 1) throw UsageError("simulate_vol_path: size mismatch with grid");
  const double delta = grid.delta();
  out[0] = params.y0;
  for (std::size_t k = 0; k < n; ++k) out[k + 1] = inverse_euler_step(out[k], dBH[k], delta, params);
}

std::vector<double> simulate_vol_path(const DriverIncrements& drivers, const GridSpec& grid,
                                      const ModelParams& params) {
  std::vector<double> out(grid.steps() + 1);
  simulate_vol_path(drivers.dBH, grid, params, out);
  return out;
}

void simulate_price_terminal(const DriverIncrements& drivers, std::span<const double> vol_path,
                             const GridSpec& grid, const ModelParams& params, const SigmaSpec& sigma,
                             PathResult& out) {
  const std::size_t n = grid.steps();
  if (vol_path.size() != n + 1 || drivers.size() != n)
    throw UsageError("simulate_price_terminal: drivers and volatility path do not match the grid");
  const double delta = grid.delta();
  double quadratic = 0.0;
  double stochastic = 0.0;
  double z = 0.0;
  bool sigma_vanished = false;
  for (std::size_t j = 0; j < n; ++j) {
    const double s = sigma(vol_path[j]);
    quadratic += s * s;
    stochastic += s * drivers.dW[j];
    if (s > 0.0)
      z += drivers.dVtilde[j] / s;
    else
      sigma_vanished = true;
  }
  out.log_price = std::log(params.s0) + params.mu * params.horizon - 0.5 * quadratic * delta + stochastic;
  out.price = std::exp(out.log_price);
  out.z_weight = sigma_vanished ? std::numeric_limits<double>::quiet_NaN() : z;
}

PathResult simulate_price_terminal(const DriverIncrements& drivers, std::span<const double> vol_path,
                                   const GridSpec& grid, const ModelParams& params, const SigmaSpec& sigma) {
  PathResult out;
  out.vol_path.assign(vol_path.begin(), vol_path.end());
  simulate_price_terminal(drivers, vol_path, grid, params, sigma, out);
  return out;
}

double minimal_martingale_density(const DriverIncrements& drivers, std::span<const double> vol_path,
                                  const GridSpec& grid, const ModelParams& params, const SigmaSpec& sigma) {
  const std::size_t n = grid.steps();
  if (vol_path.size() != n + 1 || drivers.size() != n)
    throw UsageError("minimal_martingale_density: drivers and volatility path do not match the grid");
  const double premium = params.lambda - params.mu;
  const double rho_bar = std::sqrt(1.0 - params.rho * params.rho);
  double exponent = 0.0;
  double energy = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double s = sigma(vol_path[j]);
    if (!(s > 0.0)) throw InvalidSigmaError("sigma vanishes on the path; minimal martingale density undefined");
    const double eta1 = params.rho * premium / s;
    const double eta2 = rho_bar * premium / s;
    exponent += eta1 * drivers.dV[j] + eta2 * drivers.dVtilde[j];
    energy += eta1 * eta1 + eta2 * eta2;
  }
  return std::exp(exponent - 0.5 * energy * grid.delta());
}

ParameterCondition parameter_condition(double order, const ModelParams& params) {
  ParameterCondition c;
  c.order = order;
  const double denom = params.nu * params.nu * params.hurst * std::pow(params.horizon, 2.0 * params.hurst - 1.0);
  c.bound = denom > 0.0 ? 2.0 * params.kappa / denom : std::numeric_limits<double>::infinity();
  c.strict_margin = c.bound - (3.0 * order + 1.0);
  c.inverse_moment_margin = c.bound - (order + 1.0);
  c.strict_holds = c.strict_margin >= 0.0;
  c.inverse_moment_holds = c.inverse_moment_margin >= 0.0;
  return c;
}

MomentDiagnostics moment_diagnostics(std::span<const std::vector<double>> paths, double order,
                                     const GridSpec& grid) {
  if (paths.empty()) throw UsageError("moment_diagnostics: empty batch");
  const std::size_t points = grid.steps() + 1;
  for (const auto& p : paths)
    if (p.size() != points) throw UsageError("moment_diagnostics: path length does not match the grid");

  MomentDiagnostics d;
  d.order = order;

  // Running means are exact for constant data.
  std::vector<double> moment(points, 0.0), inverse(points, 0.0);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const double w = 1.0 / static_cast<double>(i + 1);
    for (std::size_t k = 0; k < points; ++k) {
      moment[k] += (std::pow(paths[i][k], order) - moment[k]) * w;
      inverse[k] += (std::pow(paths[i][k], -order) - inverse[k]) * w;
    }
  }
  d.sup_moment = *std::max_element(moment.begin(), moment.end());
  d.sup_inverse_moment = *std::max_element(inverse.begin(), inverse.end());

  const std::size_t n = grid.steps();
  const std::size_t max_lag = std::max<std::size_t>(1, n / 4);
  std::vector<double> log_h, log_m;
  for (std::size_t lag = 1; lag <= max_lag; lag *= 2) {
    double mean = 0.0;
    std::size_t count = 0;
    for (const auto& p : paths) {
      for (std::size_t k = 0; k + lag <= n; ++k) {
        ++count;
        mean += (std::pow(std::abs(p[k + lag] - p[k]), order) - mean) / static_cast<double>(count);
      }
    }
    d.lags.push_back(lag);
    d.increment_moments.push_back(mean);
    if (mean > 0.0) {
      log_h.push_back(std::log(static_cast<double>(lag) * grid.delta()));
      log_m.push_back(std::log(mean));
    }
  }
  d.increment_exponent = fit_slope(log_h, log_m);
  return d;
}

PathSimulator::PathSimulator(const ModelParams& params, const GridSpec& grid, const SigmaSpec& sigma,
                             bool with_density)
    : params_(params),
      grid_(grid),
      sigma_(sigma),
      drivers_(grid, params.hurst, params.rho),
      with_density_(with_density) {
  if (sigma.requires_independent_drivers() && params.rho != 0.0)
    throw InvalidSigmaError("linear sigma is only admissible with independent drivers (rho = 0)");
}

void PathSimulator::simulate(std::uint64_t seed, std::uint64_t path_id, PathWorkspace& ws) const {
  drivers_.generate(seed, path_id, ws.drivers);
  ws.result.vol_path.resize(grid_.steps() + 1);
  simulate_vol_path(ws.drivers.dBH, grid_, params_, ws.result.vol_path);
  simulate_price_terminal(ws.drivers, ws.result.vol_path, grid_, params_, sigma_, ws.result);
  if (with_density_)
    ws.result.density = minimal_martingale_density(ws.drivers, ws.result.vol_path, grid_, params_, sigma_);
  else
    ws.result.density.reset();
}

}  // namespace fheston
