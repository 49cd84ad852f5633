#pragma once

#include <stdexcept>
#include <string>

namespace chb {

// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Operation not defined for the given object (e.g. pointwise derivative of the
// obstacle potential; use the graph machinery instead).
struct UnsupportedOperation : std::logic_error {
  using std::logic_error::logic_error;
};

// Configuration file missing, unreadable or syntactically broken.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A modelling assumption checked at setup or assembly time is violated
// (coefficient bounds, potential pairing, initial-mean conditions, ...).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Linear or nonlinear solve failed to reach its tolerance.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A single time step could not be completed; the caller may retry with a
// smaller step size.
struct StepRejected : SolverError {
  using SolverError::SolverError;
};

}  // namespace chb
