#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace madelung {

enum class ErrorCode {
  InvalidArgument,
  MaxStepsExceeded,
  ToleranceFailure,
  OutOfSupport,
  QuadratureFailure,
  InsufficientData,
  UnknownFigureTag,
  Io,
};

/// Short snake_case tag used in CSV status columns and CLI diagnostics.
[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

/// Validation failures map to ErrorCode::InvalidArgument; everything else is
/// a numerical or I/O failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace madelung
