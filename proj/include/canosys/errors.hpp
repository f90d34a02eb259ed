#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace canosys {

enum class ErrorCode {
  DimensionMismatch,
  InvalidArgument,
  NotOrthonormal,
  NotIsotropic,
  RankDeficient,
  NonPositiveCoefficient,
  StepTooLarge,
  NonFiniteState,
  RankCollapse,
  NotAnEigenvalue,
  ZeroHNorm,
  GridMismatch,
  NoAsymptoticLimit,
  OnEssentialSpectrum,
  UnbalancedDimensions,
  ContourTouchesEssentialSpectrum,
  PhaseJumpTooLarge,
  ConfigError,
};

std::string_view error_name(ErrorCode code);

/// Every library failure is reported through this type. `defect()` carries the
/// offending norm for tolerance violations (NaN when not applicable).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, double defect = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code), defect_(defect) {}

  ErrorCode code() const noexcept { return code_; }
  double defect() const noexcept { return defect_; }

 private:
  ErrorCode code_;
  double defect_;
};

inline std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotOrthonormal: return "NotOrthonormal";
    case ErrorCode::NotIsotropic: return "NotIsotropic";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NonPositiveCoefficient: return "NonPositiveCoefficient";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::RankCollapse: return "RankCollapse";
    case ErrorCode::NotAnEigenvalue: return "NotAnEigenvalue";
    case ErrorCode::ZeroHNorm: return "ZeroHNorm";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NoAsymptoticLimit: return "NoAsymptoticLimit";
    case ErrorCode::OnEssentialSpectrum: return "OnEssentialSpectrum";
    case ErrorCode::UnbalancedDimensions: return "UnbalancedDimensions";
    case ErrorCode::ContourTouchesEssentialSpectrum: return "ContourTouchesEssentialSpectrum";
    case ErrorCode::PhaseJumpTooLarge: return "PhaseJumpTooLarge";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace canosys
