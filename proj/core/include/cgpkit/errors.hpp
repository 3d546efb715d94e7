#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cgpkit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A covariance could not be factorized even after the full jitter ladder.
class FactorizationFailure : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class OptimizerDiverged : public Error {
 public:
  using Error::Error;
};

class DegenerateInducing : public Error {
 public:
  using Error::Error;
};

class InvalidRange : public Error {
 public:
  using Error::Error;
};

class InvalidTransform : public Error {
 public:
  using Error::Error;
};

class EmptySeries : public Error {
 public:
  using Error::Error;
};

/// File system failure (missing input, unwritable output).
class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Configuration schema violation; `pointer` is an RFC-6901 JSON pointer.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string pointer)
      : Error(pointer.empty() ? what : pointer + ": " + what),
        pointer_(std::move(pointer)) {}

  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

}  // namespace cgpkit
