#pragma once

#include <stdexcept>
#include <string>

namespace phantom {

/// Broad failure class. The CLI maps each category onto its exit code.
enum class ErrorCategory {
  config,     // malformed or missing configuration
  invariant,  // a precondition or domain invariant was violated
  io,         // file system failures
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& what) : Error(ErrorCategory::invariant, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

/// Direction is undefined for a vector shorter than the degeneracy epsilon.
class DegenerateVectorError : public InvariantError {
 public:
  using InvariantError::InvariantError;
};

inline const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::config: return "config";
    case ErrorCategory::invariant: return "invariant";
    case ErrorCategory::io: return "io";
  }
  return "unknown";
}

}  // namespace phantom
