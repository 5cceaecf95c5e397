#pragma once

#include <stdexcept>
#include <string>

namespace isac {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Layer or experiment configured with incompatible sizes/settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Tensor shape does not match what an operation requires.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Operation invoked out of order (e.g. backward before forward).
class StateError : public Error {
 public:
  using Error::Error;
};

// Invalid argument value (label out of range, bad gesture id, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

// Precondition on data content violated (e.g. batch too small).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Binary or text file does not follow the expected layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

class UnsupportedVersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed text input; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Experiment step requested before the step it depends on.
class OrderingError : public Error {
 public:
  using Error::Error;
};

}  // namespace isac
