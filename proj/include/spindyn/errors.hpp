#pragma once

#include <stdexcept>
#include <string>

namespace spindyn {

// Error categories; the CLI maps them to exit codes (config 2, data 3, numeric 4).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Perturbative-regime violation in the resonance-counting model.
struct RegimeError : std::domain_error {
  using std::domain_error::domain_error;
};

}  // namespace spindyn
