#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace polyrto {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input (mesh files, configs). Carries the 1-based line when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Cholesky factorization hit a non-positive pivot (rigid modes, bad constraints).
class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& what, std::ptrdiff_t pivot)
      : Error(what + " (pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}
  std::ptrdiff_t pivot() const noexcept { return pivot_; }

 private:
  std::ptrdiff_t pivot_;
};

}  // namespace polyrto
