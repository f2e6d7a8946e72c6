#include "fheston/contracts.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fheston/errors.hpp"

namespace fheston {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + " must be finite");
}

void require_nonnegative_argument(double x) {
  if (!(x >= 0.0)) throw DomainError("argument must be non-negative");
}

}  // namespace

// ---------------------------------------------------------------------------
// SigmaSpec

SigmaSpec SigmaSpec::shifted_power(double scale, double shift, double exponent) {
  require_finite(scale, "sigma scale");
  require_finite(shift, "sigma shift");
  if (!(scale > 0.0)) throw DomainError("shifted-power sigma needs scale c > 0");
  if (!(shift > 0.0)) throw DomainError("shifted-power sigma needs shift a > 0");
  if (!(exponent > 0.0 && exponent < 1.0)) throw DomainError("shifted-power sigma needs exponent q in (0, 1)");
  return SigmaSpec(ShiftedPowerSigma{scale, shift, exponent});
}

SigmaSpec SigmaSpec::constant(double value) {
  require_finite(value, "sigma value");
  if (!(value > 0.0)) throw DomainError("constant sigma must be positive");
  return SigmaSpec(ConstantSigma{value});
}

SigmaSpec SigmaSpec::linear(double scale) {
  require_finite(scale, "sigma scale");
  if (!(scale > 0.0)) throw DomainError("linear sigma needs scale c > 0");
  return SigmaSpec(LinearSigma{scale});
}

SigmaSpec SigmaSpec::reference() { return shifted_power(0.5, 0.01, 0.9); }

std::string SigmaSpec::name() const {
  return std::visit(Overloaded{[](const ShiftedPowerSigma&) { return std::string("shifted_power"); },
                               [](const ConstantSigma&) { return std::string("constant"); },
                               [](const LinearSigma&) { return std::string("linear"); }},
                    kind_);
}

double SigmaSpec::operator()(double x) const {
  require_nonnegative_argument(x);
  return std::visit(
      Overloaded{[x](const ShiftedPowerSigma& s) { return s.scale * std::pow(x + s.shift, s.exponent); },
                 [](const ConstantSigma& s) { return s.value; },
                 [x](const LinearSigma& s) { return s.scale * x; }},
      kind_);
}

double SigmaSpec::derivative(double x) const {
  require_nonnegative_argument(x);
  return std::visit(Overloaded{[x](const ShiftedPowerSigma& s) {
                                 return s.scale * s.exponent * std::pow(x + s.shift, s.exponent - 1.0);
                               },
                               [](const ConstantSigma&) { return 0.0; },
                               [](const LinearSigma& s) { return s.scale; }},
                    kind_);
}

double SigmaSpec::lower_bound() const noexcept {
  return std::visit(
      Overloaded{[](const ShiftedPowerSigma& s) { return s.scale * std::pow(s.shift, s.exponent); },
                 [](const ConstantSigma& s) { return s.value; }, [](const LinearSigma&) { return 0.0; }},
      kind_);
}

double SigmaSpec::holder_exponent() const noexcept {
  return std::visit(Overloaded{[](const ShiftedPowerSigma& s) { return std::min(1.0, s.exponent); },
                               [](const ConstantSigma&) { return 1.0; }, [](const LinearSigma&) { return 1.0; }},
                    kind_);
}

bool SigmaSpec::requires_independent_drivers() const noexcept {
  return std::holds_alternative<LinearSigma>(kind_);
}

SigmaValidation sigma_validate(const SigmaSpec& spec, double hurst) {
  SigmaValidation report;
  report.hurst = hurst;
  report.lower_bound = spec.lower_bound();
  report.lower_bound_ok = report.lower_bound > 0.0;
  report.holder_exponent = spec.holder_exponent();
  report.rate_exponent = report.holder_exponent * hurst;

  std::visit(Overloaded{[&](const ShiftedPowerSigma& s) {
                          // (x+a)^q <= a^q + x^q and (x+a)^q is q-Hoelder with constant 1.
                          report.growth_exponent = s.exponent;
                          report.growth_ok = s.exponent < 1.0;
                          report.holder_constant = s.scale;
                          report.derivative_bound = s.scale * s.exponent * std::pow(s.shift, s.exponent - 1.0);
                          report.derivative_ok = std::isfinite(report.derivative_bound);
                          const double growth_constant = s.scale * std::max(1.0, std::pow(s.shift, s.exponent));
                          report.assumption_constant =
                              std::max({growth_constant, report.holder_constant, report.derivative_bound});
                        },
                        [&](const ConstantSigma& s) {
                          report.growth_exponent = 0.0;
                          report.growth_ok = true;
                          report.holder_constant = s.value;
                          report.derivative_bound = 0.0;
                          report.derivative_ok = true;
                          report.assumption_constant = s.value;
                        },
                        [&](const LinearSigma& s) {
                          report.growth_exponent = 1.0;
                          report.growth_ok = false;
                          report.holder_constant = s.scale;
                          report.derivative_bound = s.scale;
                          report.derivative_ok = true;
                          report.assumption_constant = s.scale;
                        }},
             spec.kind());

  // Log-spaced sweep over [1e-8, 1e4] plus the origin: 142 points, 10011 pairs.
  std::vector<double> xs{0.0};
  constexpr int kPoints = 141;
  for (int i = 0; i < kPoints; ++i) xs.push_back(std::pow(10.0, -8.0 + 12.0 * i / (kPoints - 1)));
  double max_ratio = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      const double ratio =
          std::abs(spec(xs[j]) - spec(xs[i])) / std::pow(xs[j] - xs[i], report.holder_exponent);
      max_ratio = std::max(max_ratio, ratio);
      ++pairs;
    }
  }
  report.holder_sweep_max_ratio = max_ratio;
  report.holder_sweep_pairs = pairs;
  report.holder_ok = max_ratio <= report.holder_constant * (1.0 + 1e-9);
  return report;
}

// ---------------------------------------------------------------------------
// PayoffSpec

PayoffSpec PayoffSpec::call(double strike) {
  require_finite(strike, "strike");
  if (!(strike >= 0.0)) throw DomainError("call strike must be non-negative");
  return PayoffSpec(CallPayoff{strike});
}

PayoffSpec PayoffSpec::indicator(double lower, double upper, bool lower_closed, bool upper_closed) {
  require_finite(lower, "indicator lower bound");
  if (!(lower >= 0.0)) throw DomainError("indicator lower bound must be non-negative");
  if (!(upper >= lower)) throw DomainError("indicator needs lower <= upper");
  return PayoffSpec(IndicatorPayoff{lower, upper, lower_closed, upper_closed});
}

PayoffSpec PayoffSpec::staircase(std::vector<StaircasePayoff::Step> steps) {
  for (const auto& step : steps) {
    require_finite(step.threshold, "staircase threshold");
    require_finite(step.weight, "staircase weight");
    if (!(step.threshold >= 0.0)) throw DomainError("staircase thresholds must be non-negative");
    if (!(step.weight >= 0.0)) throw DomainError("staircase weights must be non-negative");
  }
  return PayoffSpec(StaircasePayoff{std::move(steps)});
}

PayoffSpec PayoffSpec::piecewise_linear(std::vector<double> breaks, std::vector<double> levels,
                                        std::vector<double> slopes) {
  if (breaks.empty() || breaks.size() != levels.size() || breaks.size() != slopes.size())
    throw DomainError("piecewise-linear payoff needs equally sized, non-empty breaks/levels/slopes");
  if (breaks.front() != 0.0) throw DomainError("piecewise-linear payoff must start at 0");
  for (std::size_t i = 0; i < breaks.size(); ++i) {
    require_finite(breaks[i], "break point");
    require_finite(levels[i], "level");
    require_finite(slopes[i], "slope");
    if (i > 0 && !(breaks[i] > breaks[i - 1])) throw DomainError("break points must increase strictly");
    if (levels[i] < 0.0) throw DomainError("payoff must be non-negative");
    if (i + 1 < breaks.size() && levels[i] + slopes[i] * (breaks[i + 1] - breaks[i]) < 0.0)
      throw DomainError("payoff must be non-negative");
  }
  if (slopes.back() < 0.0) throw DomainError("last piece must be non-decreasing to stay non-negative");
  return PayoffSpec(PiecewiseLinearPayoff{std::move(breaks), std::move(levels), std::move(slopes)});
}

PayoffSpec PayoffSpec::constant(double value) { return piecewise_linear({0.0}, {value}, {0.0}); }

PayoffSpec PayoffSpec::reference_call() { return call(1.0); }

PayoffSpec PayoffSpec::reference_indicator() { return indicator(0.5, 1.0, true, true); }

PayoffSpec PayoffSpec::reference_staircase() {
  std::vector<StaircasePayoff::Step> steps{{0.5, 1.0}};
  for (int k = 2; k <= 6; ++k) steps.push_back({0.5 * k, 0.5});
  return staircase(std::move(steps));
}

std::string PayoffSpec::name() const {
  return std::visit(Overloaded{[](const CallPayoff&) { return std::string("call"); },
                               [](const IndicatorPayoff&) { return std::string("indicator"); },
                               [](const StaircasePayoff&) { return std::string("staircase"); },
                               [](const PiecewiseLinearPayoff&) { return std::string("piecewise_linear"); }},
                    kind_);
}

double PayoffSpec::operator()(double x) const {
  require_nonnegative_argument(x);
  return std::visit(Overloaded{[x](const CallPayoff& p) { return std::max(x - p.strike, 0.0); },
                               [x](const IndicatorPayoff& p) {
                                 const bool above = p.lower_closed ? x >= p.lower : x > p.lower;
                                 const bool below = p.upper_closed ? x <= p.upper : x < p.upper;
                                 return (above && below) ? 1.0 : 0.0;
                               },
                               [x](const StaircasePayoff& p) {
                                 double v = 0.0;
                                 for (const auto& s : p.steps)
                                   if (x > s.threshold) v += s.weight;
                                 return v;
                               },
                               [x](const PiecewiseLinearPayoff& p) {
                                 const auto it = std::upper_bound(p.breaks.begin(), p.breaks.end(), x);
                                 const auto i = static_cast<std::size_t>(it - p.breaks.begin()) - 1;
                                 return p.levels[i] + p.slopes[i] * (x - p.breaks[i]);
                               }},
                    kind_);
}

double PayoffSpec::antiderivative(double x) const {
  require_nonnegative_argument(x);
  return std::visit(Overloaded{[x](const CallPayoff& p) {
                                 const double d = std::max(x - p.strike, 0.0);
                                 return 0.5 * d * d;
                               },
                               [x](const IndicatorPayoff& p) {
                                 return std::max(0.0, std::min(x, p.upper) - p.lower);
                               },
                               [x](const StaircasePayoff& p) {
                                 double v = 0.0;
                                 for (const auto& s : p.steps) v += s.weight * std::max(0.0, x - s.threshold);
                                 return v;
                               },
                               [x](const PiecewiseLinearPayoff& p) {
                                 double v = 0.0;
                                 for (std::size_t i = 0; i < p.breaks.size() && p.breaks[i] < x; ++i) {
                                   const double end = (i + 1 < p.breaks.size()) ? std::min(x, p.breaks[i + 1]) : x;
                                   const double w = end - p.breaks[i];
                                   v += w * (p.levels[i] + 0.5 * p.slopes[i] * w);
                                 }
                                 return v;
                               }},
                    kind_);
}

std::vector<double> PayoffSpec::discontinuities() const {
  return std::visit(Overloaded{[](const CallPayoff&) { return std::vector<double>{}; },
                               [](const IndicatorPayoff& p) {
                                 std::vector<double> out;
                                 if (p.lower > 0.0 || !p.lower_closed) out.push_back(p.lower);
                                 if (std::isfinite(p.upper) && p.upper > p.lower) out.push_back(p.upper);
                                 return out;
                               },
                               [](const StaircasePayoff& p) {
                                 std::vector<double> out;
                                 for (const auto& s : p.steps)
                                   if (s.weight != 0.0) out.push_back(s.threshold);
                                 std::sort(out.begin(), out.end());
                                 out.erase(std::unique(out.begin(), out.end()), out.end());
                                 return out;
                               },
                               [](const PiecewiseLinearPayoff& p) {
                                 std::vector<double> out;
                                 for (std::size_t i = 1; i < p.breaks.size(); ++i) {
                                   const double left =
                                       p.levels[i - 1] + p.slopes[i - 1] * (p.breaks[i] - p.breaks[i - 1]);
                                   if (left != p.levels[i]) out.push_back(p.breaks[i]);
                                 }
                                 return out;
                               }},
                    kind_);
}

GrowthBound PayoffSpec::growth_bound() const {
  return std::visit(Overloaded{[](const CallPayoff&) { return GrowthBound{1.0, 1.0}; },
                               [](const IndicatorPayoff&) { return GrowthBound{1.0, 1.0}; },
                               [](const StaircasePayoff& p) {
                                 double total = 0.0;
                                 for (const auto& s : p.steps) total += s.weight;
                                 return GrowthBound{std::max(total, 1e-300), 1.0};
                               },
                               [](const PiecewiseLinearPayoff& p) {
                                 double peak = 0.0;
                                 for (std::size_t i = 0; i < p.breaks.size(); ++i) {
                                   peak = std::max(peak, p.levels[i]);
                                   if (i + 1 < p.breaks.size())
                                     peak = std::max(peak, p.levels[i] + p.slopes[i] * (p.breaks[i + 1] - p.breaks[i]));
                                 }
                                 // last piece: a + b (x - x_m) <= max(a, b) (1 + x)
                                 return GrowthBound{std::max({peak, p.slopes.back(), 1e-300}), 1.0};
                               }},
                    kind_);
}

}  // namespace fheston
