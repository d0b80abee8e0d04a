#pragma once

#include <stdexcept>
#include <string>

namespace cvmdi {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (negative entropy
/// argument, probability outside (0,1), ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A covariance matrix or derived spectrum violates the uncertainty principle
/// beyond the numerical tolerance.
class PhysicalityError : public Error {
 public:
  using Error::Error;
};

/// Zero transmittance or zero modulation where the model needs a nonzero one.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Parameter estimation produced no usable confidence region; the protocol
/// must abort.
class EstimationFailure : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, int line = 0, std::string key = {})
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line),
        key_(std::move(key)) {}

  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  int line_;
  std::string key_;
};

}  // namespace cvmdi
