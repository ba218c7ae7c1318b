#pragma once

#include <stdexcept>
#include <string>

namespace vwork {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched dimensions or jet orders.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A precondition on the mathematical domain failed (point outside C0,
/// non-SPD metric, sqrt at zero, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative method did not converge or a linear system was singular.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace vwork
