#pragma once

#include <stdexcept>
#include <string>

namespace fdbench {

// Numeric values line up with the CLI exit codes (and the C API status codes).
enum class ErrorKind : int {
  kConfig = 1,
  kData = 2,
  kRuntime = 3,
  kInvalidArgument = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Bad experiment configuration (unknown names, impossible ranges, missing paths).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

/// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

/// A precondition of a library call was violated by the caller.
class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorKind::kInvalidArgument, what) {}
};

class RuntimeError : public Error {
 public:
  explicit RuntimeError(const std::string& what) : Error(ErrorKind::kRuntime, what) {}
};

}  // namespace fdbench
