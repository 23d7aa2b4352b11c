#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace psindy {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied arguments that violate an operation's preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical process left the finite (or guarded) region of state space.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double last_finite_time)
      : Error(what), last_finite_time_(last_finite_time) {}

  double last_finite_time() const noexcept { return last_finite_time_; }

 private:
  double last_finite_time_;
};

/// Malformed input document (model file, CSV).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration failed validation. `field()` is the dotted path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace psindy
