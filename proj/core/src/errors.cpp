#include "egotraj/errors.hpp"

#include <utility>

namespace egotraj {

Error::Error(std::string module, const std::string& what)
    : std::runtime_error(what), module_(std::move(module)) {}

namespace {

std::string format_location(const std::string& source, std::size_t line, const std::string& detail) {
  std::string out = source;
  if (line > 0) {
    out += ":" + std::to_string(line);
  }
  out += ": " + detail;
  return out;
}

}  // namespace

ParseError::ParseError(std::string source, std::size_t line, const std::string& detail)
    : Error("trajio", format_location(source, line, detail)), source_(std::move(source)), line_(line) {}

}  // namespace egotraj
