#pragma once

#include <stdexcept>
#include <string>

namespace fmcsc {

// Error taxonomy mirrored by the CLI exit codes:
//   ConfigError -> 2, DataError -> 3, ProtocolError -> 4.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dimension mismatches inside the numeric core. Treated as protocol-level
// failures when they escape to the CLI.
struct ShapeError : ProtocolError {
  using ProtocolError::ProtocolError;
};

}  // namespace fmcsc
