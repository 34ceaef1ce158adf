#include "gwct/error.hpp"

namespace gwct {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::InvalidMatrix: return "InvalidMatrix";
    case ErrorCode::InvalidAlpha: return "InvalidAlpha";
    case ErrorCode::InvalidTensor: return "InvalidTensor";
    case ErrorCode::InvalidRank: return "InvalidRank";
    case ErrorCode::InvalidWeights: return "InvalidWeights";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::CodecNotReady: return "CodecNotReady";
    case ErrorCode::IncompleteWeights: return "IncompleteWeights";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::IntegrityError: return "IntegrityError";
    case ErrorCode::EmptyStyleSet: return "EmptyStyleSet";
    case ErrorCode::ClassAbsent: return "ClassAbsent";
    case ErrorCode::LevelMismatch: return "LevelMismatch";
    case ErrorCode::GridRequiresFourStyles: return "GridRequiresFourStyles";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace gwct
