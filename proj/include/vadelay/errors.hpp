#pragma once

#include <stdexcept>
#include <string>

namespace vadelay {

// Bad or inconsistent input: malformed config, invalid distribution moments,
// unsupported topology for the requested computation, oversized state spaces.
// CLI maps these to exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The requested computation requires at least two groups carrying load.
struct UnsupportedTopologyError : ValidationError {
  using ValidationError::ValidationError;
};

// The exact Markov oracle only handles all-exponential ingredients.
struct UnsupportedDistributionError : ValidationError {
  using ValidationError::ValidationError;
};

struct StateSpaceTooLargeError : ValidationError {
  using ValidationError::ValidationError;
};

// The requested load is at or beyond the stability boundary L*rho >= 1.
// CLI maps this to exit code 3.
struct InstabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace vadelay
