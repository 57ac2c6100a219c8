#pragma once

#include <stdexcept>
#include <string>

namespace degenwave {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Argument lies outside the covered range of a piecewise function.
class OutOfRange : public Error {
 public:
  using Error::Error;
};

/// Model functions do not cover the interval an operation needs.
class CoverageError : public Error {
 public:
  using Error::Error;
};

/// Band [a,b] is empty or a field leaves it.
class BandError : public Error {
 public:
  using Error::Error;
};

class MeanOutOfBand : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// Time step breaks the monotonicity constraint of the explicit scheme.
class CflViolation : public Error {
 public:
  using Error::Error;
};

class UnsupportedTestFn : public Error {
 public:
  using Error::Error;
};

/// Invalid piece data (continuity, monotonicity, degree).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Config document does not match the schema. `pointer()` is a JSON pointer
/// to the offending value.
class SchemaError : public Error {
 public:
  SchemaError(std::string pointer, const std::string& what)
      : Error(pointer + ": " + what), pointer_(std::move(pointer)) {}

  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

}  // namespace degenwave
