#pragma once

#include <stdexcept>
#include <string>

namespace apap {

/// Broad failure class; the CLI maps each to an exit code.
enum class ErrorKind { Usage, Data, Numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

/// Missing files, unsupported formats, corrupt headers.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(ErrorKind::Data, "line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Input that violates a contract precondition (duplicates, too few points, size mismatch).
class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class DuplicateError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// Rank-deficient or tied eigen systems.
class DegenerateError : public Error {
 public:
  explicit DegenerateError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class InfinityError : public Error {
 public:
  explicit InfinityError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class IllConditionedError : public Error {
 public:
  explicit IllConditionedError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class UnreliableWindowError : public Error {
 public:
  explicit UnreliableWindowError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class EmptyOverlapError : public Error {
 public:
  explicit EmptyOverlapError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

}  // namespace apap
