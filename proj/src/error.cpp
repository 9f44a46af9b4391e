#include "secdf/error.hpp"

namespace secdf {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::SpectralDisagreement: return "SpectralDisagreement";
    case ErrorCode::NotConnected: return "NotConnected";
    case ErrorCode::ZeroRow: return "ZeroRow";
    case ErrorCode::MissingFeedback: return "MissingFeedback";
    case ErrorCode::UnknownScenario: return "UnknownScenario";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::CombinatorialBlowup: return "CombinatorialBlowup";
    case ErrorCode::DivergentGeometry: return "DivergentGeometry";
    case ErrorCode::SearchExhausted: return "SearchExhausted";
    case ErrorCode::NotInGamma: return "NotInGamma";
    case ErrorCode::NonMonotone: return "NonMonotone";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::GammaBarEmpty: return "GammaBarEmpty";
    case ErrorCode::CertificateFalse: return "CertificateFalse";
    case ErrorCode::NotScalar: return "NotScalar";
    case ErrorCode::UnknownFigure: return "UnknownFigure";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace secdf
