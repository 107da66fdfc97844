#pragma once

#include <stdexcept>
#include <string>

namespace evoqrnn {

/// Invalid settings: out-of-range sizes, bad dataset lengths, unknown options.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Caller broke an operation's preconditions (bad index, length mismatch).
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

/// Failures that only show up while running: I/O, non-finite values.
class RuntimeFailure : public std::runtime_error {
 public:
  explicit RuntimeFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace evoqrnn
