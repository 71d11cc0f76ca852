#pragma once

#include <stdexcept>
#include <string>

namespace oamfso {

// Invalid or inconsistent campaign configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Degenerate input, non-convergent solver or quadrature (CLI exit code 3).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing file or missing channel pair in a sample store (CLI exit code 4).
class MissingInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace oamfso
