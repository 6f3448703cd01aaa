#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace efg {

/// Base of all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public Error {
public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Well-formed input carrying invalid values (non-finite coordinates,
/// degenerate cells, out-of-range ids).
class DataError : public Error {
public:
  using Error::Error;
};

/// Invalid arguments or run configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Moment matrix could not be factored at an evaluation point.
class SingularityError : public Error {
public:
  using Error::Error;
};

/// det F <= 0 at a Gauss point.
class InversionError : public Error {
public:
  InversionError(std::size_t point, long step, double jacobian)
      : Error("inverted configuration at Gauss point " + std::to_string(point) +
              " (step " + std::to_string(step) + ", J = " + std::to_string(jacobian) + ")"),
        point_(point), step_(step) {}
  std::size_t point() const noexcept { return point_; }
  long step() const noexcept { return step_; }

private:
  std::size_t point_;
  long step_;
};

/// Non-finite displacement during time stepping.
class DivergenceError : public Error {
public:
  explicit DivergenceError(long step)
      : Error("non-finite displacement at step " + std::to_string(step)), step_(step) {}
  long step() const noexcept { return step_; }

private:
  long step_;
};

/// An analytical oracle failed (e.g. no root in bracket).
class OracleError : public Error {
public:
  using Error::Error;
};

}  // namespace efg
