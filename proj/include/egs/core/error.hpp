#pragma once

#include <stdexcept>
#include <string>

namespace egs {

/// Root of the toolkit's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments or option combinations (CLI exit code 2).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (CLI exit code 3).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Solver, optimizer or evaluation failure (CLI exit code 4).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// R^2 requested on an observation vector with zero variance.
class UndefinedR2Error : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace egs
