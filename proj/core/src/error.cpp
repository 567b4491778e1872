#include "tailtest/error.hpp"

namespace tailtest {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::parameter_domain: return "parameter_domain";
    case ErrorCode::degenerate_sample: return "degenerate_sample";
    case ErrorCode::spec: return "spec";
    case ErrorCode::degenerate_denominator: return "degenerate_denominator";
    case ErrorCode::resolution: return "resolution";
    case ErrorCode::calibration_tolerance: return "calibration_tolerance";
    case ErrorCode::numeric: return "numeric";
    case ErrorCode::layering: return "layering";
    case ErrorCode::optimization_failure: return "optimization_failure";
    case ErrorCode::insufficient_sample: return "insufficient_sample";
    case ErrorCode::input: return "input";
    case ErrorCode::usage: return "usage";
  }
  return "unknown";
}

}  // namespace tailtest
