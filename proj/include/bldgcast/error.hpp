#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bldgcast {

enum class ErrorCode {
  // ingest
  MalformedTimestamp,
  NonNumericValue,
  EmptyFile,
  NonMonotonicTimestamps,
  NegativeValue,
  CalendarNotBinary,
  UnitMismatch,
  // align
  IncompatibleInterval,
  InsufficientKnownPoints,
  MissingChannel,
  EmptyIntersection,
  // features
  EmptyInput,
  TooFewRows,
  InsufficientHistory,
  WindowTooLong,
  ZeroVarianceTarget,
  ZeroVariance,
  // models
  DimensionMismatch,
  ShapeMismatch,
  NonFiniteInput,
  SingularSystem,
  StaleCache,
  EmptyDataset,
  DivergedTraining,
  FormatError,
  UnsupportedVersion,
  // tune
  EmptySpace,
  EmptyGrid,
  // eval
  LengthMismatch,
  SpanExceedsData,
  LengthExceedsData,
  KTooLarge,
  // datagen
  InvalidProfile,
  // cli / config
  InvalidConfig,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedTimestamp: return "MalformedTimestamp";
    case ErrorCode::NonNumericValue: return "NonNumericValue";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::NonMonotonicTimestamps: return "NonMonotonicTimestamps";
    case ErrorCode::NegativeValue: return "NegativeValue";
    case ErrorCode::CalendarNotBinary: return "CalendarNotBinary";
    case ErrorCode::UnitMismatch: return "UnitMismatch";
    case ErrorCode::IncompatibleInterval: return "IncompatibleInterval";
    case ErrorCode::InsufficientKnownPoints: return "InsufficientKnownPoints";
    case ErrorCode::MissingChannel: return "MissingChannel";
    case ErrorCode::EmptyIntersection: return "EmptyIntersection";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::WindowTooLong: return "WindowTooLong";
    case ErrorCode::ZeroVarianceTarget: return "ZeroVarianceTarget";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::StaleCache: return "StaleCache";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::DivergedTraining: return "DivergedTraining";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::EmptySpace: return "EmptySpace";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::SpanExceedsData: return "SpanExceedsData";
    case ErrorCode::LengthExceedsData: return "LengthExceedsData";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::InvalidProfile: return "InvalidProfile";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace bldgcast
