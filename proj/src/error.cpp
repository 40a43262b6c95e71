#include "madelung/error.hpp"

#include <cmath>
#include <string>

#include "madelung/params.hpp"

namespace madelung {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::MaxStepsExceeded: return "max_steps_exceeded";
    case ErrorCode::ToleranceFailure: return "tolerance_failure";
    case ErrorCode::OutOfSupport: return "out_of_support";
    case ErrorCode::QuadratureFailure: return "quadrature_failure";
    case ErrorCode::InsufficientData: return "insufficient_data";
    case ErrorCode::UnknownFigureTag: return "unknown_figure_tag";
    case ErrorCode::Io: return "io_error";
  }
  return "unknown";
}

namespace {

void require_positive(const char* name, double value) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw Error(ErrorCode::InvalidArgument,
                std::string("parameter ") + name + " must be positive and finite, got " + std::to_string(value));
  }
}

}  // namespace

void Params::validate() const {
  require_positive("T", T);
  require_positive("X", X);
  require_positive("hbar", hbar);
  require_positive("m", m);
}

}  // namespace madelung
