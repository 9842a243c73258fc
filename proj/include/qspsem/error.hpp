#pragma once

#include <stdexcept>
#include <string>

namespace qspsem {

// Base of every error thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (e.g. |x| > 1).
struct DomainError : Error {
  using Error::Error;
};

// Malformed argument: empty lists, bad grid sizes, inconsistent dimensions.
struct ArgumentError : Error {
  using Error::Error;
};

// Input is well formed but violates a stated precondition of the operation.
struct PreconditionError : Error {
  using Error::Error;
};

// Numerical procedure failed to reach its tolerance.
struct NumericError : Error {
  NumericError(const std::string& what, int step = -1) : Error(what), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

// Request exceeds a hard size cap.
struct CapacityError : Error {
  using Error::Error;
};

// A self-check on an internally produced value failed.
struct InternalConsistencyError : Error {
  using Error::Error;
};

}  // namespace qspsem
