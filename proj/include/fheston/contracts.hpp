#pragma once

// Volatility functions sigma and payoff functions f.
//
// Every payoff carries a closed-form antiderivative F(x) = int_0^x f(z) dz,
// which the smoothed estimator needs; that is why arbitrary closures are not
// accepted here.

#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace fheston {

// ---------------------------------------------------------------------------
// sigma

struct ShiftedPowerSigma {
  double scale;     // c
  double shift;     // a
  double exponent;  // q

  friend bool operator==(const ShiftedPowerSigma&, const ShiftedPowerSigma&) = default;
};
struct ConstantSigma {
  double value;

  friend bool operator==(const ConstantSigma&, const ConstantSigma&) = default;
};
// Not admissible under the regularity assumptions; accepted only with rho = 0.
struct LinearSigma {
  double scale;

  friend bool operator==(const LinearSigma&, const LinearSigma&) = default;
};

struct SigmaValidation {
  // (i) positive lower bound on [0, inf)
  double lower_bound = 0.0;
  bool lower_bound_ok = false;
  // (ii) sigma(x) <= C (1 + x^q) with q < 1
  double growth_exponent = 0.0;
  bool growth_ok = false;
  // (iii) |sigma(x) - sigma(y)| <= C |x - y|^r
  double holder_exponent = 0.0;
  double holder_constant = 0.0;
  double holder_sweep_max_ratio = 0.0;  // largest observed ratio over the pair grid
  std::size_t holder_sweep_pairs = 0;
  bool holder_ok = false;
  // (iv) sigma'(x) <= C (1 + |x|^{q'})
  double derivative_bound = 0.0;
  bool derivative_ok = false;

  double assumption_constant = 0.0;  // C_sigma covering (ii)-(iv)
  double hurst = 0.0;
  double rate_exponent = 0.0;  // r * H

  bool conforming() const noexcept { return lower_bound_ok && growth_ok && holder_ok && derivative_ok; }
};

class SigmaSpec {
 public:
  using Kind = std::variant<ShiftedPowerSigma, ConstantSigma, LinearSigma>;

  /// c (x + a)^q with c, a > 0 and q in (0, 1).
  static SigmaSpec shifted_power(double scale, double shift, double exponent);
  static SigmaSpec constant(double value);
  static SigmaSpec linear(double scale);
  /// 0.5 (x + 0.01)^0.9, the volatility function of the reference experiments.
  static SigmaSpec reference();

  const Kind& kind() const noexcept { return kind_; }
  std::string name() const;

  /// sigma(x); throws DomainError for x < 0.
  double operator()(double x) const;
  double derivative(double x) const;
  /// Certified infimum of sigma on [0, inf).
  double lower_bound() const noexcept;
  /// Analytic Hoelder exponent r on [0, inf).
  double holder_exponent() const noexcept;
  /// True when the family violates the regularity assumptions and may only
  /// be used with independent drivers.
  bool requires_independent_drivers() const noexcept;

  friend bool operator==(const SigmaSpec&, const SigmaSpec&) = default;

 private:
  explicit SigmaSpec(Kind kind) : kind_(kind) {}
  Kind kind_;
};

/// Checks items (i)-(iv) of the sigma regularity assumptions on [0, inf).
/// The Hoelder exponent is the analytic one for the family; a sweep over a
/// log-spaced pair grid confirms the constant. Never throws on violations.
SigmaValidation sigma_validate(const SigmaSpec& spec, double hurst);

// ---------------------------------------------------------------------------
// payoffs

struct CallPayoff {
  double strike;

  friend bool operator==(const CallPayoff&, const CallPayoff&) = default;
};
// 1 on the interval between lower and upper, with the stated end conventions.
// upper may be +infinity.
struct IndicatorPayoff {
  double lower;
  double upper;
  bool lower_closed = true;
  bool upper_closed = true;

  friend bool operator==(const IndicatorPayoff&, const IndicatorPayoff&) = default;
};
// sum_i weight_i * 1_{(threshold_i, inf)}(x)
struct StaircasePayoff {
  struct Step {
    double threshold;
    double weight;
    friend bool operator==(const Step&, const Step&) = default;
  };
  std::vector<Step> steps;

  friend bool operator==(const StaircasePayoff&, const StaircasePayoff&) = default;
};
// On [breaks[i], breaks[i+1]) f(x) = levels[i] + slopes[i] (x - breaks[i]);
// breaks[0] = 0 and the last piece extends to infinity.
struct PiecewiseLinearPayoff {
  std::vector<double> breaks;
  std::vector<double> levels;
  std::vector<double> slopes;

  friend bool operator==(const PiecewiseLinearPayoff&, const PiecewiseLinearPayoff&) = default;
};

struct GrowthBound {
  double constant;  // C_f
  double power;     // p
};

class PayoffSpec {
 public:
  using Kind = std::variant<CallPayoff, IndicatorPayoff, StaircasePayoff, PiecewiseLinearPayoff>;

  static PayoffSpec call(double strike);
  static PayoffSpec indicator(double lower, double upper, bool lower_closed = true, bool upper_closed = true);
  static PayoffSpec staircase(std::vector<StaircasePayoff::Step> steps);
  static PayoffSpec piecewise_linear(std::vector<double> breaks, std::vector<double> levels,
                                     std::vector<double> slopes);
  static PayoffSpec constant(double value);

  /// The three payoffs of the reference experiments:
  /// (x - 1)^+,  1_[0.5, 1](x),  1_(0.5, inf)(x) + 1/2 sum_{k=2}^{6} 1_(0.5k, inf)(x).
  static PayoffSpec reference_call();
  static PayoffSpec reference_indicator();
  static PayoffSpec reference_staircase();

  const Kind& kind() const noexcept { return kind_; }
  std::string name() const;

  /// f(x) for x >= 0.
  double operator()(double x) const;
  /// F(x) = int_0^x f(z) dz in closed form.
  double antiderivative(double x) const;
  /// Points where f jumps.
  std::vector<double> discontinuities() const;
  /// (C_f, p) with f(x) <= C_f (1 + x^p).
  GrowthBound growth_bound() const;

  friend bool operator==(const PayoffSpec&, const PayoffSpec&) = default;

 private:
  explicit PayoffSpec(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
};

}  // namespace fheston
