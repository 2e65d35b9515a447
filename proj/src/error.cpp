#include "plausible/error.hpp"

namespace plausible {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::InvalidCalibration: return "InvalidCalibration";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::NoGroundPlane: return "NoGroundPlane";
    case ErrorCode::DegenerateFloor: return "DegenerateFloor";
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::ZeroAreaFootprint: return "ZeroAreaFootprint";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidGamma: return "InvalidGamma";
    case ErrorCode::NonUnitNormal: return "NonUnitNormal";
    case ErrorCode::NoAssetForCategory: return "NoAssetForCategory";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile:
    case ErrorCode::SchemaViolation:
    case ErrorCode::InvalidCalibration:
    case ErrorCode::IoError:
    case ErrorCode::DimensionMismatch:
      return 1;
    case ErrorCode::NoGroundPlane:
    case ErrorCode::DegenerateFloor:
    case ErrorCode::UnknownCategory:
    case ErrorCode::InsufficientData:
    case ErrorCode::NoAssetForCategory:
    case ErrorCode::BehindCamera:
    case ErrorCode::OutOfBounds:
    case ErrorCode::InvalidGamma:
      return 2;
    default:
      return 3;
  }
}

}  // namespace plausible
