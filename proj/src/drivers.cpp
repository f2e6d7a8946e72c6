#include "fheston/drivers.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

#include "fheston/errors.hpp"

namespace fheston {

namespace {

void require_fbm_hurst(double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("Hurst index must lie in (0, 1)");
}

void require_volterra_hurst(double hurst) {
  if (!(hurst > 0.5 && hurst < 1.0))
    throw DomainError("Volterra kernel representation requires 1/2 < H < 1");
}

// Process-wide cache keyed by (n, H, T) for immutable grid objects.
template <typename Value>
class GridCache {
 public:
  std::shared_ptr<const Value> get(const GridSpec& grid, double hurst) {
    const Key key{grid.steps(), hurst, grid.horizon()};
    {
      std::lock_guard lock(mutex_);
      if (auto it = entries_.find(key); it != entries_.end()) return it->second;
    }
    // Built outside the lock; a concurrent duplicate build is harmless.
    auto value = std::make_shared<const Value>(grid, hurst);
    std::lock_guard lock(mutex_);
    return entries_.try_emplace(key, std::move(value)).first->second;
  }

 private:
  using Key = std::tuple<std::size_t, double, double>;
  std::mutex mutex_;
  std::map<Key, std::shared_ptr<const Value>> entries_;
};

}  // namespace

GridSpec::GridSpec(std::size_t n, double horizon) : n_(n), horizon_(horizon) {
  if (n == 0) throw UsageError("grid needs at least one step");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon T must be positive");
  delta_ = horizon / static_cast<double>(n);
}

double hurst_constant(double hurst) {
  require_volterra_hurst(hurst);
  const double a = 2.0 - 2.0 * hurst;
  const double b = hurst - 0.5;
  const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return std::sqrt(hurst * (2.0 * hurst - 1.0) * std::exp(-log_beta));
}

double fbm_covariance(double t, double s, double hurst) {
  require_fbm_hurst(hurst);
  if (t < 0.0 || s < 0.0) throw DomainError("fbm_covariance: times must be non-negative");
  const double two_h = 2.0 * hurst;
  return 0.5 * (std::pow(t, two_h) + std::pow(s, two_h) - std::pow(std::abs(t - s), two_h));
}

double fgn_autocovariance(std::size_t lag, double hurst) {
  require_fbm_hurst(hurst);
  const double two_h = 2.0 * hurst;
  const double k = static_cast<double>(lag);
  if (lag == 0) return 1.0;
  return 0.5 * (std::pow(k + 1.0, two_h) + std::pow(k - 1.0, two_h) - 2.0 * std::pow(k, two_h));
}

Eigen::MatrixXd fgn_covariance(const GridSpec& grid, double hurst) {
  require_fbm_hurst(hurst);
  const auto n = static_cast<Eigen::Index>(grid.steps());
  const double scale = std::pow(grid.delta(), 2.0 * hurst);
  std::vector<double> gamma(grid.steps());
  for (std::size_t lag = 0; lag < grid.steps(); ++lag) gamma[lag] = scale * fgn_autocovariance(lag, hurst);

  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) cov(i, j) = gamma[static_cast<std::size_t>(std::abs(i - j))];
  return cov;
}

FgnFactor::FgnFactor(const GridSpec& grid, double hurst) {
  Eigen::LLT<Eigen::MatrixXd> llt(fgn_covariance(grid, hurst));
  if (llt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "fGn covariance is not numerically positive definite (n=" << grid.steps() << ", H=" << hurst
        << "); add diagonal jitter of order 1e-12 * delta^{2H} or reduce n";
    throw NumericalError(msg.str());
  }
  lower_ = llt.matrixL();
}

std::shared_ptr<const FgnFactor> FgnFactor::cached(const GridSpec& grid, double hurst) {
  static GridCache<FgnFactor> cache;
  return cache.get(grid, hurst);
}

void FgnFactor::color(std::span<const double> z, std::span<double> out) const {
  const auto n = lower_.rows();
  Eigen::Map<const Eigen::VectorXd> in(z.data(), n);
  Eigen::Map<Eigen::VectorXd> res(out.data(), n);
  res.noalias() = lower_.triangularView<Eigen::Lower>() * in;
}

void fgn_cholesky(const GridSpec& grid, double hurst, PathStream& stream, std::span<double> out) {
  const auto factor = FgnFactor::cached(grid, hurst);
  std::vector<double> z(grid.steps());
  stream.fill_normal(z);
  factor->color(z, out);
}

std::vector<double> fgn_cholesky(const GridSpec& grid, double hurst, PathStream& stream) {
  std::vector<double> out(grid.steps());
  fgn_cholesky(grid, hurst, stream, out);
  return out;
}

VolterraKernel::VolterraKernel(double hurst, std::size_t order)
    : hurst_(hurst),
      c_hurst_(hurst_constant(hurst)),
      inner_(gauss_jacobi_unit(order, hurst - 1.5)),
      log_panel_(gauss_jacobi_unit(12, 0.0)),
      left_cell_(gauss_jacobi_unit(8, 1.0 - 2.0 * hurst)),
      right_cell_(gauss_jacobi_unit(8, 2.0 * hurst - 1.0)),
      interior_cell_(gauss_jacobi_unit(4, 0.0)) {}

double VolterraKernel::operator()(double t, double s) const {
  if (!(s > 0.0)) throw DomainError("Volterra kernel is singular at s <= 0");
  if (s >= t) return 0.0;
  const double h = hurst_ - 0.5;
  // int_0^L (s + w)^h w^{h-1} dw with L = t - s
  const double width = std::min(t - s, 2.0 * s);
  double acc = 0.0;
  for (std::size_t i = 0; i < inner_.nodes.size(); ++i)
    acc += inner_.weights[i] * std::pow(s + width * inner_.nodes[i], h);
  acc *= std::pow(width, h);

  if (t - s > width) {
    // w = e^x on [log 2s, log(t - s)], panels of unit length
    const double lo = std::log(width);
    const double hi = std::log(t - s);
    const auto panels = static_cast<std::size_t>(std::ceil(hi - lo));
    const double step = (hi - lo) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      const double a = lo + step * static_cast<double>(p);
      double part = 0.0;
      for (std::size_t i = 0; i < log_panel_.nodes.size(); ++i) {
        const double w = std::exp(a + step * log_panel_.nodes[i]);
        part += log_panel_.weights[i] * std::pow(s + w, h) * std::pow(w, h);
      }
      acc += step * part;
    }
  }
  return c_hurst_ * std::pow(s, -h) * acc;
}

std::vector<double> VolterraKernel::cell_weights(double t, std::size_t cells, double delta) const {
  std::vector<double> out(cells);
  const double two_h1 = 2.0 * hurst_ - 1.0;
  for (std::size_t j = 0; j < cells; ++j) {
    const double a = static_cast<double>(j) * delta;
    double integral = 0.0;
    if (j == 0) {
      // K^2 ~ s^{1-2H} near 0; the rule carries r^{1-2H}.
      const double width = (cells == 1) ? t : delta;
      for (std::size_t i = 0; i < left_cell_.nodes.size(); ++i) {
        const double r = left_cell_.nodes[i];
        const double k = (*this)(t, width * r);
        integral += left_cell_.weights[i] * k * k * std::pow(r, two_h1);
      }
      integral *= width;
    } else if (j + 1 == cells) {
      // K^2 ~ (t-s)^{2H-1} near t; the rule carries r^{2H-1}.
      const double width = t - a;
      for (std::size_t i = 0; i < right_cell_.nodes.size(); ++i) {
        const double r = right_cell_.nodes[i];
        const double k = (*this)(t, t - width * r);
        integral += right_cell_.weights[i] * k * k * std::pow(r, -two_h1);
      }
      integral *= width;
    } else {
      for (std::size_t i = 0; i < interior_cell_.nodes.size(); ++i) {
        const double k = (*this)(t, a + delta * interior_cell_.nodes[i]);
        integral += interior_cell_.weights[i] * k * k;
      }
      integral *= delta;
    }
    out[j] = std::sqrt(integral / delta);
  }
  return out;
}

double volterra_kernel(double t, double s, double hurst) { return VolterraKernel(hurst)(t, s); }

KernelTable::KernelTable(const GridSpec& grid, double hurst) : n_(grid.steps()), hurst_(hurst) {
  require_volterra_hurst(hurst);
  const VolterraKernel kernel(hurst);
  weights_.resize(n_ * (n_ + 1) / 2);
  for (std::size_t k = 1; k <= n_; ++k) {
    const auto row_k = kernel.cell_weights(grid.time(k), k, grid.delta());
    std::copy(row_k.begin(), row_k.end(), weights_.begin() + static_cast<std::ptrdiff_t>(k * (k - 1) / 2));
  }
}

std::shared_ptr<const KernelTable> KernelTable::cached(const GridSpec& grid, double hurst) {
  static GridCache<KernelTable> cache;
  return cache.get(grid, hurst);
}

void KernelTable::increments(std::span<const double> dV, std::span<double> dBH) const {
  double previous = 0.0;
  for (std::size_t k = 1; k <= n_; ++k) {
    const auto w = row(k);
    double level = 0.0;
    for (std::size_t j = 0; j < k; ++j) level += w[j] * dV[j];
    dBH[k - 1] = level - previous;
    previous = level;
  }
}

DriverGenerator::DriverGenerator(const GridSpec& grid, double hurst, double rho)
    : grid_(grid), hurst_(hurst), rho_(rho) {
  if (!(rho >= -1.0 && rho <= 1.0)) throw DomainError("correlation rho must lie in [-1, 1]");
  rho_bar_ = std::sqrt(1.0 - rho * rho);
  if (rho == 0.0) {
    factor_ = FgnFactor::cached(grid, hurst);
  } else {
    require_volterra_hurst(hurst);
    kernel_ = KernelTable::cached(grid, hurst);
  }
}

void DriverGenerator::generate(std::uint64_t seed, std::uint64_t path_id, DriverIncrements& out) const {
  const std::size_t n = grid_.steps();
  out.resize(n);
  const double sd = std::sqrt(grid_.delta());

  PathStream v_stream(seed, path_id, DriverId::WienerV);
  PathStream vt_stream(seed, path_id, DriverId::WienerVTilde);
  v_stream.fill_normal(out.dV, sd);
  vt_stream.fill_normal(out.dVtilde, sd);

  if (factor_) {
    thread_local std::vector<double> z;
    z.resize(n);
    PathStream fgn_stream(seed, path_id, DriverId::FgnNoise);
    fgn_stream.fill_normal(z);
    factor_->color(z, out.dBH);
    out.dW = out.dVtilde;
  } else {
    kernel_->increments(out.dV, out.dBH);
    for (std::size_t k = 0; k < n; ++k) out.dW[k] = rho_ * out.dV[k] + rho_bar_ * out.dVtilde[k];
  }
}

DriverIncrements correlated_drivers(const GridSpec& grid, double hurst, double rho, std::uint64_t seed,
                                    std::uint64_t path_id) {
  DriverIncrements out;
  DriverGenerator(grid, hurst, rho).generate(seed, path_id, out);
  return out;
}

}  // namespace fheston
