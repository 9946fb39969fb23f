#pragma once

#include <stdexcept>
#include <string>

namespace phinv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration text. Line and column are 1-based.
class ConfigSyntaxError : public Error {
 public:
  ConfigSyntaxError(const std::string& message, int line, int column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
              message),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// A well-formed value that violates a domain invariant (omega <= 0, t1 <= t0, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Integrator failure: loss of positivity or a non-finite state.
class SolverError : public Error {
 public:
  SolverError(const std::string& message, double t) : Error(message), t_(t) {}
  double time() const noexcept { return t_; }

 private:
  double t_;
};

/// Grid too small for a state, or a state that is not band limited enough for the metric.
class GridError : public Error {
 public:
  using Error::Error;
};

/// Dense linear-algebra failure (matrix exponential overflow, indefinite metric).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace phinv
