#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace finsler {

enum class ErrorCode {
  invalid_input,
  metric_invalid,
  degenerate_direction,
  no_convergence,
  conditioning,
  pullback_degenerate,
  not_berwald,
  chart_degenerate,
  unsupported_dimension,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        double residual = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(what), code_(code), residual_(residual) {}

  ErrorCode code() const { return code_; }

  /// Last residual, for no-convergence errors; NaN otherwise.
  double residual() const { return residual_; }

 private:
  ErrorCode code_;
  double residual_;
};

}  // namespace finsler
