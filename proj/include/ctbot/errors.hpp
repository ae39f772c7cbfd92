#pragma once

#include <stdexcept>
#include <string>

namespace ctbot {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A joint coordinate lies outside the configured limits. `joint()` is 1-based.
class LimitViolation : public std::domain_error {
 public:
  LimitViolation(int joint, double value, double lower, double upper);
  int joint() const noexcept { return joint_; }
  double value() const noexcept { return value_; }

 private:
  int joint_;
  double value_;
};

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularTransmission : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Model, scene or target file could not be read or failed validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ctbot
