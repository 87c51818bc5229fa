#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace incat {

// Base for every error raised by the library. Callers that only need to
// distinguish "bad input" from "bug" can catch this.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Input could not be decoded at all (malformed JSON, truncated CSV).
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : Error(what + " (at byte " + std::to_string(byte_offset) + ")"), offset_(byte_offset) {}

  std::size_t byte_offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

// Input decoded but violates a documented shape or precondition.
class ValidationError : public Error {
public:
  using Error::Error;
};

// ValidationError tied to one field of a submitted document, e.g.
// "answers.q3".
class FieldError : public ValidationError {
public:
  FieldError(std::string field, const std::string& message)
      : ValidationError(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

// A referenced id/name does not exist.
class NotFoundError : public Error {
public:
  using Error::Error;
};

// Filesystem or persistence failure.
class StoreError : public Error {
public:
  using Error::Error;
};

} // namespace incat
