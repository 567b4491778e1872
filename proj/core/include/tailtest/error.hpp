#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tailtest {

enum class ErrorCode {
  parameter_domain,
  degenerate_sample,
  spec,
  degenerate_denominator,
  resolution,
  calibration_tolerance,
  numeric,
  layering,
  optimization_failure,
  insufficient_sample,
  input,
  usage,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base for every error raised by the library. The code drives CLI exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Outward calibration could not reach the requested tolerance; carries the closest b seen.
class CalibrationError : public Error {
 public:
  CalibrationError(const std::string& what, double best_b, double best_achieved)
      : Error(ErrorCode::calibration_tolerance, what), best_b_(best_b), best_achieved_(best_achieved) {}
  double best_b() const noexcept { return best_b_; }
  double best_achieved() const noexcept { return best_achieved_; }

 private:
  double best_b_;
  double best_achieved_;
};

/// Iterative solver failure; the trace holds the iterates visited.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::vector<double> trace = {})
      : Error(ErrorCode::numeric, what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

}  // namespace tailtest
