#pragma once

#include <stdexcept>
#include <string>

namespace eulerlab {

// Error taxonomy. The CLI maps these onto exit codes:
//   ConfigError -> 2, NumericalFault -> 3, HypothesisViolation -> 4,
//   anything else -> 1.

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (wrong axis, asymmetric matrix...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or parameters supplied by the user.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Requested time step exceeds the CFL limit. Carries the largest admissible dt.
class CflViolation : public ConfigError {
 public:
  CflViolation(const std::string& what, double suggested_dt)
      : ConfigError(what), suggested_dt_(suggested_dt) {}
  double suggested_dt() const noexcept { return suggested_dt_; }

 private:
  double suggested_dt_;
};

/// Non-finite values or a failed numerical kernel.
class NumericalFault : public Error {
 public:
  using Error::Error;
};

/// A quantity that must be conserved (zero mean, divergence) is not.
class ConservationViolation : public Error {
 public:
  using Error::Error;
};

/// The mathematical hypotheses needed by a diagnostic do not hold for the data.
class HypothesisViolation : public Error {
 public:
  using Error::Error;
};

/// An inequality that holds for any valid quadrature failed.
class QuadratureBug : public Error {
 public:
  using Error::Error;
};

/// More than one candidate where exactly one is required.
class AmbiguityError : public Error {
 public:
  using Error::Error;
};

}  // namespace eulerlab
