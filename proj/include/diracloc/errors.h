#pragma once

#include <stdexcept>
#include <string>

namespace diracloc {

/// Malformed or inconsistent input (bad config, violated precondition on user data).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The requested quantity is numerically undefined at this point
/// (band edge collision, vanishing Wronskian, energy in the spectrum, ...).
class NumericalDegeneracy : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace diracloc
