#pragma once

#include <stdexcept>
#include <string>

namespace dfop {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Argument or hyperparameter outside its documented range.
class ParameterError : public Error {
public:
  using Error::Error;
};

/// A numeric update produced an overflow or non-finite values.
/// Carries the 1-based stream step when raised inside a streaming update.
class NumericError : public Error {
public:
  explicit NumericError(const std::string& what, long long step = -1)
      : Error(step >= 0 ? what + " (step " + std::to_string(step) + ")" : what),
        step_(step) {}

  long long step() const noexcept { return step_; }

private:
  long long step_ = -1;
};

/// Matrix is not positive definite where the operation requires it.
/// Carries the 0-based pivot index at which the factorization failed.
class SingularMatrixError : public Error {
public:
  explicit SingularMatrixError(const std::string& what, int pivot = -1)
      : Error(pivot >= 0 ? what + " (pivot " + std::to_string(pivot) + ")" : what),
        pivot_(pivot) {}

  int pivot() const noexcept { return pivot_; }

private:
  int pivot_ = -1;
};

/// Malformed input file content. Carries the 1-based line number.
class ParseError : public Error {
public:
  ParseError(const std::string& what, long long line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

  long long line() const noexcept { return line_; }

private:
  long long line_ = 0;
};

/// Structurally valid input whose fields do not match the documented schema.
class SchemaError : public Error {
public:
  using Error::Error;
};

/// Operation needs generator ground truth that this stream does not carry.
class MissingTruthError : public Error {
public:
  using Error::Error;
};

}  // namespace dfop
