#pragma once

#include <stdexcept>
#include <string>

namespace wcd {

// Base for every library error. Each subclass maps to a CLI exit-code class.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape mismatches between ensembles, fields and functionals.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Coordinate index outside [0, d).
class IndexError : public Error {
 public:
  using Error::Error;
};

// Invalid construction parameters or configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite iterates or runaway energy.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace wcd
