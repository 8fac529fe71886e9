#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace switchoff {

enum class ErrorKind {
  InvalidParams,
  InvalidProfile,
  NonFinite,
  MaxIterationsExceeded,
  NotBracketed,
  SwitchOffBeforePeak,
  QTooSmall,
  DegenerateProfile,
  NonMonotoneSamples,
  ContinuityMismatch,
  EmptySamples,
  StepTooLarge,
  MeanVerificationFailed,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::InvalidProfile: return "InvalidProfile";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::MaxIterationsExceeded: return "MaxIterationsExceeded";
    case ErrorKind::NotBracketed: return "NotBracketed";
    case ErrorKind::SwitchOffBeforePeak: return "SwitchOffBeforePeak";
    case ErrorKind::QTooSmall: return "QTooSmall";
    case ErrorKind::DegenerateProfile: return "DegenerateProfile";
    case ErrorKind::NonMonotoneSamples: return "NonMonotoneSamples";
    case ErrorKind::ContinuityMismatch: return "ContinuityMismatch";
    case ErrorKind::EmptySamples: return "EmptySamples";
    case ErrorKind::StepTooLarge: return "StepTooLarge";
    case ErrorKind::MeanVerificationFailed: return "MeanVerificationFailed";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the ErrorKind tags so
/// callers (and the CLI exit-code mapping) can dispatch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace switchoff
