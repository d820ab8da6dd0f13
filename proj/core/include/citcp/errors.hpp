#pragma once

#include <stdexcept>
#include <string>

namespace citcp {

// Malformed or inconsistent input data (CSV files, model files, checkpoints).
// The CLI maps this to a distinct exit code from usage errors.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Bad configuration: unknown keys, out-of-range values, missing sections.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace citcp
