#pragma once

#include <stdexcept>
#include <string>

namespace glow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files. `offset` is a byte offset into the file when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t offset = 0)
      : Error(what), line_(line), offset_(offset) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t line_;
  std::size_t offset_;
};

// Well-formed input that violates a contract (unknown category, bad index, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// No corpus layout can serve the request.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace glow
