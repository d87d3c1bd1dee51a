#pragma once

#include <stdexcept>
#include <string>

namespace aue {

// Broad failure classes. The command-line front end maps each one to a
// distinct exit status.
enum class ErrorCategory { Usage, Data, Numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

// Malformed or inconsistent input data (files, labels, folds, landmarks).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : DataError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : DataError(what) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

class RangeError : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateFaceError : public DataError {
 public:
  using DataError::DataError;
};

class LeakageError : public DataError {
 public:
  using DataError::DataError;
};

// Training or numerical failure (non-finite parameters, bad shapes).
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorCategory::Numeric, what) {}
};

// Programmer-facing contract violations surfaced by the CLI as usage errors.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorCategory::Usage, what) {}
};

}  // namespace aue
