#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rinkfx {

/// An input row that cannot be interpreted; carries the 1-based line number
/// and the offending field name.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::string field, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ", field '" +
                           field + "': " + message),
        line_(line),
        field_(std::move(field)) {}

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

/// Well-formed data that violates a precondition or domain invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or flag combination.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Coordinate descent failed to converge; carries the lambda path index.
class SolverError : public std::runtime_error {
 public:
  SolverError(int lambda_index, const std::string& message)
      : std::runtime_error("lambda[" + std::to_string(lambda_index) +
                           "]: " + message),
        lambda_index_(lambda_index) {}

  int lambda_index() const { return lambda_index_; }

 private:
  int lambda_index_;
};

}  // namespace rinkfx
