#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace topseg {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text: bad JSON line, bad vector file row, bad HTML encoding.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Well-formed input that violates a data invariant or an operation precondition.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// A stage input is absent; the message names the stage that produces it.
class MissingArtifactError : public Error {
public:
  using Error::Error;
};

}  // namespace topseg
