#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace egotraj {

// Base of every error raised by the library. `module()` names the component
// that detected the problem ("geom", "trajio", "anchors", ...).
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what);
  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// Mathematical domain violations, e.g. a logarithm requested on the rotation
// cut locus.
class DomainError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class InvariantError : public Error {
 public:
  using Error::Error;
};

class DegenerateError : public Error {
 public:
  using Error::Error;
};

class ScaleResidualError : public Error {
 public:
  using Error::Error;
};

class GapError : public Error {
 public:
  using Error::Error;
};

class NoAnchorError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& detail);

  const std::string& source() const noexcept { return source_; }
  // 1-based line number; 0 when the failure is not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

}  // namespace egotraj
