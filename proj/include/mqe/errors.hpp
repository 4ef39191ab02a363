#pragma once

#include <stdexcept>
#include <string>

namespace mqe {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad inputs: malformed files, out-of-range values, inconsistent configs.
struct ValidationError : Error {
  using Error::Error;
};

// Filesystem problems: missing files, unwritable outputs.
struct IoError : Error {
  using Error::Error;
};

// Linear-algebra failures, non-finite inputs.
struct NumericError : Error {
  using Error::Error;
};

// A robot has no legal move available.
struct PlanningError : Error {
  using Error::Error;
};

}  // namespace mqe
