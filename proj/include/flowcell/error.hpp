#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flowcell {

// Base of every exception thrown by the core library. The C API maps each
// subclass onto one status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Flow matrix is not traceless.
class CompressibleFlow : public Error {
 public:
  using Error::Error;
};

// Config text could not be parsed; `line` is 1-based, 0 when not tied to a line.
class ConfigError : public Error {
 public:
  ConfigError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Cell grid too coarse for its neighborhood stencil; callers fall back to
// the all-pairs loop or abort.
class DegenerateGrid : public Error {
 public:
  using Error::Error;
};

// Basis does not have the sheared-box layout required by a policy.
class LayoutMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyWindow : public Error {
 public:
  using Error::Error;
};

class VerificationFailure : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace flowcell
