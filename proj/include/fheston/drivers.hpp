#pragma once

// Gaussian drivers of the fractional Heston-type model: fractional Brownian
// increments dB^H, the Wiener process V behind its Volterra representation,
// an independent Wiener process Vtilde, and the price driver
// W = rho V + sqrt(1 - rho^2) Vtilde.

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "fheston/quadrature.hpp"
#include "fheston/rng.hpp"

namespace fheston {

// Equidistant partition t_k = k T / n of [0, T].
class GridSpec {
 public:
  GridSpec(std::size_t n, double horizon);

  std::size_t steps() const noexcept { return n_; }
  double horizon() const noexcept { return horizon_; }
  double delta() const noexcept { return delta_; }
  double time(std::size_t k) const noexcept {
    return horizon_ * static_cast<double>(k) / static_cast<double>(n_);
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  std::size_t n_;
  double horizon_;
  double delta_;
};

// Per-path increments on a GridSpec; every array has length n.
struct DriverIncrements {
  std::vector<double> dV;
  std::vector<double> dVtilde;
  std::vector<double> dW;
  std::vector<double> dBH;

  void resize(std::size_t n) {
    dV.resize(n);
    dVtilde.resize(n);
    dW.resize(n);
    dBH.resize(n);
  }
  std::size_t size() const noexcept { return dBH.size(); }
};

/// Normalising constant c_H of the Volterra kernel,
/// sqrt(H(2H-1) / B(2-2H, H-1/2)), evaluated through log-gamma.
/// Throws DomainError unless 1/2 < H < 1.
double hurst_constant(double hurst);

/// fBm covariance 1/2 (t^{2H} + s^{2H} - |t-s|^{2H}).
double fbm_covariance(double t, double s, double hurst);

/// Autocovariance of unit-step fractional Gaussian noise at integer lag.
double fgn_autocovariance(std::size_t lag, double hurst);

/// Joint covariance of the n increments of B^H on the grid.
Eigen::MatrixXd fgn_covariance(const GridSpec& grid, double hurst);

// Lower Cholesky factor of the fGn covariance on a grid. Immutable once built.
class FgnFactor {
 public:
  FgnFactor(const GridSpec& grid, double hurst);

  /// Shared, cached factor for (n, H, T). Thread-safe.
  static std::shared_ptr<const FgnFactor> cached(const GridSpec& grid, double hurst);

  const Eigen::MatrixXd& lower() const noexcept { return lower_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(lower_.rows()); }

  /// out = L z.
  void color(std::span<const double> z, std::span<double> out) const;

 private:
  Eigen::MatrixXd lower_;
};

/// Exact fGn sample: draws n standard normals from `stream` and colours them.
void fgn_cholesky(const GridSpec& grid, double hurst, PathStream& stream, std::span<double> out);
std::vector<double> fgn_cholesky(const GridSpec& grid, double hurst, PathStream& stream);

// K(t, s) = c_H s^{1/2-H} int_s^t u^{H-1/2} (u-s)^{H-3/2} du for s < t.
//
// With u = s + (t-s) v the integral becomes
// (t-s)^{H-1/2} int_0^1 v^{H-3/2} (s + (t-s) v)^{H-1/2} dv, which a 32-point
// Gauss-Jacobi rule for the weight v^{H-3/2} handles without an endpoint
// singularity. When s << t - s the factor (s + (t-s) v)^{H-1/2} is nearly
// singular at v = 0, so only u - s <= 2s goes to the Jacobi rule and the rest
// is integrated in log(u - s) with panelled Gauss-Legendre.
class VolterraKernel {
 public:
  explicit VolterraKernel(double hurst, std::size_t order = 32);

  double hurst() const noexcept { return hurst_; }
  /// Throws DomainError for s <= 0.
  double operator()(double t, double s) const;

  /// Root-mean-square of K(t, .) over each cell [j delta, (j+1) delta],
  /// j < cells. The first and last cells use Gauss-Jacobi rules matched to
  /// the s^{1-2H} and (t-s)^{2H-1} behaviour of K^2 at the cell ends.
  std::vector<double> cell_weights(double t, std::size_t cells, double delta) const;

 private:
  double hurst_;
  double c_hurst_;
  QuadratureRule inner_;
  QuadratureRule log_panel_;
  QuadratureRule left_cell_;
  QuadratureRule right_cell_;
  QuadratureRule interior_cell_;
};

/// Convenience form of VolterraKernel; builds the rule on every call.
double volterra_kernel(double t, double s, double hurst);

// Lower-triangular Volterra weights: weights(k, j) stands for K(t_k, .) on
// cell j, and B^H_{t_k} ~= sum_{j<k} weights(k, j) dV_j.
class KernelTable {
 public:
  KernelTable(const GridSpec& grid, double hurst);

  static std::shared_ptr<const KernelTable> cached(const GridSpec& grid, double hurst);

  std::size_t steps() const noexcept { return n_; }
  double hurst() const noexcept { return hurst_; }
  /// Zero whenever j >= k.
  double weight(std::size_t k, std::size_t j) const noexcept {
    return j < k ? weights_[k * (k - 1) / 2 + j] : 0.0;
  }
  /// Row k, length k.
  std::span<const double> row(std::size_t k) const noexcept {
    return {weights_.data() + k * (k - 1) / 2, k};
  }

  /// dBH[k] = B_{t_{k+1}} - B_{t_k} built from the Wiener increments dV.
  void increments(std::span<const double> dV, std::span<double> dBH) const;

 private:
  std::size_t n_;
  double hurst_;
  std::vector<double> weights_;
};

// Generates DriverIncrements for one path from per-driver counter streams.
//
// rho = 0 takes the exact Cholesky route for dB^H and sets dW = dVtilde;
// any other rho builds dB^H from dV through the KernelTable so that B^H and W
// share the Wiener component V.
class DriverGenerator {
 public:
  DriverGenerator(const GridSpec& grid, double hurst, double rho);

  const GridSpec& grid() const noexcept { return grid_; }
  double rho() const noexcept { return rho_; }
  bool uses_volterra() const noexcept { return kernel_ != nullptr; }

  void generate(std::uint64_t seed, std::uint64_t path_id, DriverIncrements& out) const;

 private:
  GridSpec grid_;
  double hurst_;
  double rho_;
  double rho_bar_;
  std::shared_ptr<const FgnFactor> factor_;
  std::shared_ptr<const KernelTable> kernel_;
};

DriverIncrements correlated_drivers(const GridSpec& grid, double hurst, double rho,
                                    std::uint64_t seed, std::uint64_t path_id);

}  // namespace fheston
