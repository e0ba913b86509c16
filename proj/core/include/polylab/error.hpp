#pragma once

#include <stdexcept>
#include <string>

namespace polylab {

// Thrown when an operation's precondition on its inputs is violated.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Mollifier/field/path geometry that cannot be combined.
class GeometryMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Refinement did not settle within the iteration budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace polylab
