#pragma once

#include <stdexcept>

namespace gdn {

// File-system / parse failures on external inputs (CLI exit code 2).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failures: divergence, factorization failure (CLI exit code 3).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration or arguments map to std::invalid_argument (exit code 1).

}  // namespace gdn
