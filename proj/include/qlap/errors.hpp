#pragma once

#include <stdexcept>
#include <string>

namespace qlap {

// Malformed geometry or dictionary input, or a geometry outside its validity bound.
class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical precondition failed (non-PD Gram, nonpositive metric, bad fit design).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid command line or configuration file.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace qlap
