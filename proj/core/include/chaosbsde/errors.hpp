#pragma once

#include <stdexcept>
#include <string>

namespace chaosbsde {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (non-finite x, r > N, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or invalid configuration (N < d*p, unknown problem, bad key).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A request would exceed a configured size or memory cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Bad input data: length mismatch, non-finite sample values.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure during a solve (blow-up, ill-conditioned system).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IllConditionedError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace chaosbsde
