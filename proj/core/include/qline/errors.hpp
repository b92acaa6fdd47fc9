#pragma once

#include <stdexcept>
#include <string>

namespace qline {

/// Invalid physical or geometric input (precondition violation).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure: divergence, non-convergence, NaN/overflow during stepping.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Calibration search failed (no bracket, no convergence); message carries the scan trace.
class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration parse or validation failure, anchored to line/column when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string message, int line = 0, int column = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ":" +
                                          std::to_string(column) + ": " + message
                                    : message),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_ = 0;
  int column_ = 0;
};

}  // namespace qline
