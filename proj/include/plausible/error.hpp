#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace plausible {

enum class ErrorCode {
  MissingFile,
  SchemaViolation,
  InvalidCalibration,
  IoError,
  DimensionMismatch,
  BehindCamera,
  DegenerateInput,
  NoGroundPlane,
  DegenerateFloor,
  UnknownCategory,
  InsufficientData,
  ZeroAreaFootprint,
  OutOfBounds,
  IndexOutOfRange,
  InvalidGamma,
  NonUnitNormal,
  NoAssetForCategory,
  InvariantViolation,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code. what() is "<Code>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// CLI exit code classes: 1 input/schema, 2 domain failure, 3 internal.
int exit_code_for(ErrorCode code);

}  // namespace plausible
