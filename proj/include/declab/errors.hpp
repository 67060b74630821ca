#pragma once

#include <stdexcept>
#include <string>

namespace declab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the documented domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Evaluation requested inside the exclusion band of a singular point.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Too few clean sample scales for a log-log fit.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// A structural hypothesis (e.g. positive curvature) fails on the sample grid.
class HypothesisViolation : public Error {
 public:
  using Error::Error;
};

/// phi1' changes sign, so the parametric curve is not a graph over phi1.
class NotAGraphError : public Error {
 public:
  using Error::Error;
};

/// Quadrature or sampling requirements exceed the configured budget.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Memory budget exceeded; carries the sizes involved.
class BudgetError : public ResolutionError {
 public:
  BudgetError(const std::string& what, double required_bytes, double available_bytes)
      : ResolutionError(what + " (required " + std::to_string(required_bytes) +
                        " bytes, available " + std::to_string(available_bytes) + " bytes)"),
        required_(required_bytes),
        available_(available_bytes) {}
  double required() const { return required_; }
  double available() const { return available_; }

 private:
  double required_;
  double available_;
};

/// Sample grid does not cover the truncation box of a weight.
class CoverageError : public Error {
 public:
  using Error::Error;
};

/// Malformed or out-of-range experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace declab
