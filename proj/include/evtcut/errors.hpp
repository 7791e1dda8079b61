#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace evtcut {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid distribution parameters (alpha <= 0 or c > 0).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Fewer samples than the configured fitting floor.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// Every excess is zero, so no scale can be estimated.
class DegenerateSampleError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Caller broke a documented precondition (e.g. unsorted input).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Invalid generator or pipeline configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed text input. line() is 1-based; 0 means "not tied to a line".
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace evtcut
