#pragma once

#include <stdexcept>
#include <string>

namespace arlcp {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input line, bad record field, duplicate record. Carries the
// 1-based line number when it came from a file (0 otherwise).
class ParseError : public Error {
  public:
    ParseError(std::size_t line, const std::string& msg)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}

    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

class DuplicateRecordError : public ParseError {
  public:
    using ParseError::ParseError;
};

// Invalid configuration (thresholds, weights, sim setup, lexicon file).
class ConfigError : public Error {
  public:
    using Error::Error;
};

// Precondition violation on an operation's inputs.
class InvalidInputError : public Error {
  public:
    using Error::Error;
};

// A corpus parsed fine but contained no records.
class EmptyInputError : public Error {
  public:
    using Error::Error;
};

}  // namespace arlcp
