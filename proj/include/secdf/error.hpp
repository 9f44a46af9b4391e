#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace secdf {

enum class ErrorCode {
  InvalidArgument,
  InvalidGraph,
  SpectralDisagreement,
  NotConnected,
  ZeroRow,
  MissingFeedback,
  UnknownScenario,
  DimensionMismatch,
  CombinatorialBlowup,
  DivergentGeometry,
  SearchExhausted,
  NotInGamma,
  NonMonotone,
  BudgetExceeded,
  GammaBarEmpty,
  CertificateFalse,
  NotScalar,
  UnknownFigure,
  ConfigError,
  InvariantViolation,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace secdf
