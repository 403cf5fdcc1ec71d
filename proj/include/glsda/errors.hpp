#pragma once

#include <stdexcept>
#include <string>

namespace glsda {

// Error taxonomy mirrored by the CLI exit codes: usage 2, data 3, numeric 4.

struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace glsda
