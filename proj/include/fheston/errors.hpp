#pragma once

#include <stdexcept>
#include <string>

namespace fheston {

// Argument outside the mathematical domain of an operation (H range, negative
// time, |rho| > 1, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed request: empty batch, non-dyadic ladder, zero path count.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Volatility function cannot be divided by (zero lower bound or zero value).
class InvalidSigmaError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Floating-point breakdown, e.g. a covariance matrix that is not numerically
// positive definite.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fheston
