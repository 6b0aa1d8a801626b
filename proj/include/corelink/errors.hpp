#pragma once

#include <stdexcept>
#include <string>

namespace corelink {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input files (bad JSON, missing keys).
struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error(what) {}
};

// Structurally valid input that violates a documented invariant.
struct ValidationError : Error {
  explicit ValidationError(const std::string& what) : Error(what) {}
};

// Bad experiment configuration (unknown keys, dimension mismatches).
struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace corelink
