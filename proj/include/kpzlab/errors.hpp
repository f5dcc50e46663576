#pragma once

#include <stdexcept>
#include <string>

namespace kpz {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments: shape mismatches, out-of-range parameters,
/// non-finite inputs, degenerate distributions.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration (maps to CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An iterative numerical procedure exhausted its budget (exit code 3).
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double previous, double last)
      : Error(what + " (last two values: " + std::to_string(previous) + ", " +
              std::to_string(last) + ")"),
        previous_(previous),
        last_(last) {}

  double previous() const { return previous_; }
  double last() const { return last_; }

 private:
  double previous_;
  double last_;
};

/// A simulated Brownian path ran out of its time horizon before the
/// embedding produced all requested stopping times.
class GridExhaustedError : public Error {
 public:
  using Error::Error;
};

}  // namespace kpz
