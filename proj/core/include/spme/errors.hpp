#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spme {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operands live on different grids or have incompatible sizes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A scalar argument is outside the admissible range (t < 0, nu <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A constructed object violates one of its invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// The Gamma-transform quadrature did not settle.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

// The time grid cannot resolve the requested oscillation.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

// Time-stepping failures. `step` is the index of the step being computed.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::size_t step)
      : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class StepFailure : public SolverError {
 public:
  using SolverError::SolverError;
};

class DivergenceError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace spme
