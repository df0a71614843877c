#pragma once

#include <stdexcept>
#include <string>

namespace qroute {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller-supplied input violates a documented precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The request's fidelity floor cannot be met by any path.
class InfeasibleRequest : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// An enumeration would exceed its configured state-space guard.
class StateSpaceTooLarge : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A computed quantity broke an internal invariant.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace qroute
