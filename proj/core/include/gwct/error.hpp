#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gwct {

enum class ErrorCode {
  EmptyRegion,
  InvalidMatrix,
  InvalidAlpha,
  InvalidTensor,
  InvalidRank,
  InvalidWeights,
  ShapeMismatch,
  IndexOutOfRange,
  CodecNotReady,
  IncompleteWeights,
  FormatError,
  IntegrityError,
  EmptyStyleSet,
  ClassAbsent,
  LevelMismatch,
  GridRequiresFourStyles,
  InvalidArgument,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by gwct_core carries one of the codes above so callers
// (the CLI in particular) can map it to an exit status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gwct
