#pragma once

#include <stdexcept>
#include <string>

namespace monocert {

enum class ErrorCode {
  Parse,
  DomainError,
  UnboundVariable,
  NonDifferentiablePrimitive,
  InvalidVariableUse,
  DimensionMismatch,
  OriginNotEquilibrium,
  InvalidDelayLaw,
  Assumption1Violated,
  InvalidHistory,
  HistoryGap,
  PathValidationFailure,
  PathDomainError,
  PsiValidationFailure,
  InvalidConfig,
  StepSizeUnderflow,
  NonFiniteState,
  EigenFailure,
  LPNumericalFailure,
  NotInOmega,
  NoConvergence,
  NonmonotoneComponent,
  NondifferentiablePoint,
  PreconditionViolated,
  UncertifiedLyapunov,
  UncertifiedPath,
  ConditionFailed,
  NegativityFailed,
  Assumption3Violated,
  CertificationFailed,
  ConfigParseError,
  IoError,
};

[[nodiscard]] const char* to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. The code is the
/// stable, machine-readable part; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace monocert
