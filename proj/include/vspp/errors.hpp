#pragma once

#include <stdexcept>
#include <string>

namespace vspp {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the supported range of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Root-finding bracket without a sign change.
class BracketError : public Error {
 public:
  using Error::Error;
};

/// Iteration or step budget exhausted, or tolerance not met.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Back-solving a modulated medium hit a singular combination.
class SingularMediumError : public Error {
 public:
  using Error::Error;
};

/// eps1 + eps2 = 0 (or mu1 + mu2 = 0): surface-mode resonance pole.
class ResonancePoleError : public Error {
 public:
  using Error::Error;
};

/// eps1 = eps2 makes the general single-interface formula 0/0.
class DegenerateFormulaError : public Error {
 public:
  using Error::Error;
};

/// Caller-side precondition violated.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Eigenvalue branch could not be followed across a time step.
class TrackingError : public Error {
 public:
  using Error::Error;
};

}  // namespace vspp
