/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <stdexcept>
#include <string>

namespace cecbench {

// Raised when an input violates a documented precondition. `field` names the
// offending parameter (dotted path for config keys).
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// File parsing failure with 1-based location; column 0 means "whole line".
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string source, std::size_t line, std::size_t column, const std::string& message)
      : std::runtime_error(source + ":" + std::to_string(line) +
                           (column ? ":" + std::to_string(column) : std::string{}) + ": " + message),
        source_(std::move(source)),
        line_(line),
        column_(column) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::string source_;
  std::size_t line_;
  std::size_t column_;
};

namespace detail {

inline void require(bool condition, const char* field, const std::string& message) {
  if (!condition) throw ValidationError(field, message);
}

}  // namespace detail
}  // namespace cecbench
