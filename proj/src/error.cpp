#include "bevlab/error.hpp"

namespace bevlab {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InsufficientViews: return "InsufficientViews";
    case ErrorCode::EmptyStaticMap: return "EmptyStaticMap";
    case ErrorCode::UnlabeledCloud: return "UnlabeledCloud";
    case ErrorCode::DegenerateBatch: return "DegenerateBatch";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::EmptyCorrespondence: return "EmptyCorrespondence";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::PoseOutsideScene: return "PoseOutsideScene";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace bevlab
