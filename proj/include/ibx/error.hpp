#pragma once

#include <stdexcept>
#include <string>

namespace ibx {

// thrown when tensor shapes / indices do not line up
struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// thrown when a computation produces or receives non-finite values
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// thrown on invalid configuration (bad field values, missing sections)
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// thrown on malformed command usage (maps to exit code 2 in the CLI)
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CheckpointError : std::runtime_error {
  enum class Kind { corrupt_manifest, version_mismatch, shape_mismatch, payload_length, io };
  Kind kind;
  CheckpointError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

}  // namespace ibx
