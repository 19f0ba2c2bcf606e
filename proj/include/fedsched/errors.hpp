#pragma once

#include <stdexcept>
#include <string>

namespace fedsched {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnresolvableAddress : Error {
  using Error::Error;
};

struct MissingSlowdown : Error {
  using Error::Error;
};

struct UnrecoverableTask : Error {
  using Error::Error;
};

struct EnumerationGuardExceeded : Error {
  using Error::Error;
};

// Malformed input text; `where` is a field path or "line N".
struct ParseError : Error {
  ParseError(std::string where_, const std::string& msg) : Error(where_ + ": " + msg), where(std::move(where_)) {}
  std::string where;
};

}  // namespace fedsched
