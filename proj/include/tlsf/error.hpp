#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tlsf {

// Base class for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed files, unknown names, out-of-range values.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Syntax error in STL text, with 1-based source position.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// A temporal window that discretizes to no samples of the signal.
class HorizonError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Linear algebra breakdown (non-SPD matrix, failed factorization).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace tlsf
