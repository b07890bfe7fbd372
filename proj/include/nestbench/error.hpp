#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace nestbench {

// Base for every failure the toolkit reports. Subclasses name the failing layer
// so the CLI can map them to exit codes and callers can catch selectively.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed tree or subtree, unknown node id, empty member set.
class StructuralError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class EmbeddingError : public Error {
 public:
  using Error::Error;
};

// A subtree could not be turned into a schema (e.g. a node without a value kind).
class EmissionError : public Error {
 public:
  using Error::Error;
};

// Schema depth outside the gradable range.
class GradingError : public Error {
 public:
  using Error::Error;
  int depth = 0;
};

// Brute-force enumeration refused because the input is too large.
class RefusalError : public Error {
 public:
  using Error::Error;
};

class LoadError : public Error {
 public:
  LoadError(std::string path, std::size_t line, std::string field, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + field + ": " + what),
        path_(std::move(path)),
        line_(line),
        field_(std::move(field)) {}

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::string path_;
  std::size_t line_;
  std::string field_;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class CorrelationError : public Error {
 public:
  using Error::Error;
};

// Endpoint failures. `retryable` distinguishes transient faults from auth/config faults.
class EndpointError : public Error {
 public:
  EndpointError(const std::string& what, bool retryable, int attempts = 0)
      : Error(what), retryable_(retryable), attempts_(attempts) {}
  bool retryable() const { return retryable_; }
  int attempts() const { return attempts_; }
  void set_attempts(int n) { attempts_ = n; }

 private:
  bool retryable_;
  int attempts_;
};

class AuthError : public EndpointError {
 public:
  explicit AuthError(const std::string& what) : EndpointError(what, false, 1) {}
};

}  // namespace nestbench
