#pragma once

// Fractional Heston-type model:
//   dS = mu S dt + sigma(Y) S dW,
//   dY = 1/2 (kappa / Y - theta Y) dt + nu/2 dB^H,
// with Y simulated by the drift-implicit (inverse) Euler scheme and held
// piecewise constant between grid points.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fheston/contracts.hpp"
#include "fheston/drivers.hpp"

namespace fheston {

struct ModelParams {
  double mu = 0.5;
  double kappa = 1.0;
  double theta = 1.0;
  double nu = 0.14;
  double hurst = 0.7;
  double rho = 0.0;
  double lambda = 0.0;  // risk-free rate
  double s0 = 1.0;
  double y0 = 1.0;
  double horizon = 1.0;  // T

  /// Throws DomainError on an invalid parameter set; returns warnings for
  /// the exploratory regime H <= 1/2.
  std::vector<std::string> validate() const;

  /// H in (1/2, 1): the convergence and moment guarantees apply.
  bool full_guarantee() const noexcept { return hurst > 0.5 && hurst < 1.0; }
  /// sqrt(kappa / theta), the zero-noise fixed point of the volatility drift.
  double fixed_point() const noexcept;
  double discount_factor() const noexcept;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct PathResult {
  std::vector<double> vol_path;  // Y-hat at t_0..t_n
  double log_price = 0.0;        // X-hat_T
  double price = 0.0;            // S-hat_T = exp(X-hat_T)
  double z_weight = 0.0;         // Z-hat_T = sum sigma(Y-hat_{t_j})^{-1} dVtilde_j
  std::optional<double> density;
};

/// One drift-implicit Euler step: the positive root of
/// (2 + theta d) y^2 - 2 a y - kappa d = 0 with a = y_prev + nu/2 dBH.
/// Strictly positive for every finite input.
double inverse_euler_step(double y_prev, double dBH, double delta, const ModelParams& params) noexcept;

/// Residual of y_next = y_prev + 1/2 (kappa / y_next - theta y_next) delta + nu/2 dBH,
/// relative to the sum of the term magnitudes. Evaluated in long double.
double scheme_residual(double y_prev, double y_next, double dBH, double delta, const ModelParams& params) noexcept;

void simulate_vol_path(std::span<const double> dBH, const GridSpec& grid, const ModelParams& params,
                       std::span<double> out);
std::vector<double> simulate_vol_path(const DriverIncrements& drivers, const GridSpec& grid,
                                      const ModelParams& params);

/// Fills log_price, price and z_weight from a volatility path built on the
/// same drivers. sigma is taken at left endpoints.
void simulate_price_terminal(const DriverIncrements& drivers, std::span<const double> vol_path,
                             const GridSpec& grid, const ModelParams& params, const SigmaSpec& sigma,
                             PathResult& out);
PathResult simulate_price_terminal(const DriverIncrements& drivers, std::span<const double> vol_path,
                                   const GridSpec& grid, const ModelParams& params, const SigmaSpec& sigma);

/// Radon-Nikodym weight of the minimal martingale measure at T.
/// Throws InvalidSigmaError when sigma vanishes on the path.
double minimal_martingale_density(const DriverIncrements& drivers, std::span<const double> vol_path,
                                  const GridSpec& grid, const ModelParams& params, const SigmaSpec& sigma);

struct ParameterCondition {
  double order = 0.0;  // p
  double bound = 0.0;  // 2 kappa / (nu^2 H T^{2H-1})
  bool strict_holds = false;   // 3p + 1 <= bound
  double strict_margin = 0.0;  // bound - (3p + 1)
  bool inverse_moment_holds = false;   // p + 1 <= bound
  double inverse_moment_margin = 0.0;  // bound - (p + 1)
};

ParameterCondition parameter_condition(double order, const ModelParams& params);

struct MomentDiagnostics {
  double order = 0.0;
  double sup_moment = 0.0;          // max_k mean(Y_k^p)
  double sup_inverse_moment = 0.0;  // max_k mean(Y_k^{-p})
  std::vector<std::size_t> lags;    // dyadic lags in steps
  std::vector<double> increment_moments;  // mean |Y_{k+lag} - Y_k|^p
  double increment_exponent = 0.0;  // log-log slope against lag * delta
};

/// Empirical moment checks on a batch of volatility paths of equal length.
/// Throws UsageError on an empty batch.
MomentDiagnostics moment_diagnostics(std::span<const std::vector<double>> paths, double order,
                                     const GridSpec& grid);

// Reusable per-worker buffers.
struct PathWorkspace {
  DriverIncrements drivers;
  PathResult result;
};

// Simulates complete paths for a fixed model, grid and sigma.
class PathSimulator {
 public:
  PathSimulator(const ModelParams& params, const GridSpec& grid, const SigmaSpec& sigma,
                bool with_density = false);

  const ModelParams& params() const noexcept { return params_; }
  const GridSpec& grid() const noexcept { return grid_; }
  const SigmaSpec& sigma() const noexcept { return sigma_; }

  void simulate(std::uint64_t seed, std::uint64_t path_id, PathWorkspace& ws) const;

 private:
  ModelParams params_;
  GridSpec grid_;
  SigmaSpec sigma_;
  DriverGenerator drivers_;
  bool with_density_;
};

}  // namespace fheston
