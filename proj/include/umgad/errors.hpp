#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace umgad {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller misuse: bad flags, conflicting selectors, invalid configuration.
class UsageError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public UsageError {
 public:
  using UsageError::UsageError;
};

class ConflictingSelectors : public UsageError {
 public:
  using UsageError::UsageError;
};

// Problems with the input data or files.
class DataError : public Error {
 public:
  using Error::Error;
};

class MissingFile : public DataError {
 public:
  explicit MissingFile(const std::string& path) : DataError("missing file: " + path) {}
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& where, std::size_t line, const std::string& what)
      : DataError(where + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IndexOutOfRange : public DataError {
 public:
  using DataError::DataError;
};

class InconsistentNodeCount : public DataError {
 public:
  using DataError::DataError;
};

class InsufficientNodes : public DataError {
 public:
  using DataError::DataError;
};

class EmptyRelation : public DataError {
 public:
  using DataError::DataError;
};

class SingleClass : public DataError {
 public:
  using DataError::DataError;
};

class LengthMismatch : public DataError {
 public:
  using DataError::DataError;
};

class IoError : public DataError {
 public:
  using DataError::DataError;
};

class VersionMismatch : public DataError {
 public:
  using DataError::DataError;
};

class UntrainedParams : public DataError {
 public:
  using DataError::DataError;
};

// Non-finite values, collapsed reconstructions, shape bugs.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DegenerateRow : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ShapeMismatch : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class GraphConsumed : public Error {
 public:
  GraphConsumed() : Error("backward already called on this tape") {}
};

}  // namespace umgad
