#pragma once

#include <stdexcept>

namespace addpp {

// Unrecoverable numerical failure (singular Fisher matrix after jitter
// escalation, vanished support, ...).  The CLI maps this to exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace addpp
