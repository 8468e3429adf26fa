#pragma once

#include <stdexcept>
#include <string>

namespace bevlab {

enum class ErrorCode {
  InvalidArgument,
  LengthMismatch,
  DimensionMismatch,
  InsufficientViews,
  EmptyStaticMap,
  UnlabeledCloud,
  DegenerateBatch,
  EmptyMask,
  EmptyCorrespondence,
  NonFiniteLoss,
  EmptyRegion,
  PoseOutsideScene,
  ParseError,
  ValidationError,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const char* what) {
  if (!condition) fail(code, what);
}
inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace bevlab
