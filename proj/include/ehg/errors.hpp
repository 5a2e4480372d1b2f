#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ehg {

/// Input violates a documented precondition or invariant. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input; carries the 1-based line number where parsing stopped.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UnsupportedFormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class LengthError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Matrix or vector dimensions disagree with what a trained model expects.
class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Training data cannot support a fit (e.g. a single class).
class UnfittableError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Iterative numerical routine failed to converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A feature whose defining formula has no value for this input (e.g. zero band power).
class UndefinedFeatureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A metric with no value for this input, e.g. AUC over a single class.
class UndefinedMetricError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Training rows and scored rows overlapped inside an evaluation cell.
class LeakageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace ehg
