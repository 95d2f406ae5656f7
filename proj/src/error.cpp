#include "monocert/error.hpp"

namespace monocert {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::UnboundVariable: return "UnboundVariable";
    case ErrorCode::NonDifferentiablePrimitive: return "NonDifferentiablePrimitive";
    case ErrorCode::InvalidVariableUse: return "InvalidVariableUse";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::OriginNotEquilibrium: return "OriginNotEquilibrium";
    case ErrorCode::InvalidDelayLaw: return "InvalidDelayLaw";
    case ErrorCode::Assumption1Violated: return "Assumption1Violated";
    case ErrorCode::InvalidHistory: return "InvalidHistory";
    case ErrorCode::HistoryGap: return "HistoryGap";
    case ErrorCode::PathValidationFailure: return "PathValidationFailure";
    case ErrorCode::PathDomainError: return "PathDomainError";
    case ErrorCode::PsiValidationFailure: return "PsiValidationFailure";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::EigenFailure: return "EigenFailure";
    case ErrorCode::LPNumericalFailure: return "LPNumericalFailure";
    case ErrorCode::NotInOmega: return "NotInOmega";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NonmonotoneComponent: return "NonmonotoneComponent";
    case ErrorCode::NondifferentiablePoint: return "NondifferentiablePoint";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::UncertifiedLyapunov: return "UncertifiedLyapunov";
    case ErrorCode::UncertifiedPath: return "UncertifiedPath";
    case ErrorCode::ConditionFailed: return "ConditionFailed";
    case ErrorCode::NegativityFailed: return "NegativityFailed";
    case ErrorCode::Assumption3Violated: return "Assumption3Violated";
    case ErrorCode::CertificationFailed: return "CertificationFailed";
    case ErrorCode::ConfigParseError: return "ConfigParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace monocert
