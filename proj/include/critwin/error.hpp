#pragma once

#include <stdexcept>
#include <string>

namespace critwin {

// Bad arguments to a library operation (out-of-range class, invalid site, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Experiment configuration failed validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Factorization failure, non-SPD input, non-finite results.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Not enough usable points for a regression.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// critical_time could not bracket the requested level.
class ExtractionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace critwin
