#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace roadchar {

enum class ErrorCode {
  kInvalidArgument,
  kDegeneratePolygon,
  kEmptyComponent,
  kDimensionMismatch,
  kInsufficientData,
  kInsufficientDepthCoverage,
  kZeroSurroundDepth,
  kNoValidPixels,
  kMissingCounterpart,
  kPrimitiveOutOfBounds,
  kMalformedLine,
  kOutOfRangeCoordinate,
  kIo,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDegeneratePolygon: return "DegeneratePolygon";
    case ErrorCode::kEmptyComponent: return "EmptyComponent";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kInsufficientDepthCoverage: return "InsufficientDepthCoverage";
    case ErrorCode::kZeroSurroundDepth: return "ZeroSurroundDepth";
    case ErrorCode::kNoValidPixels: return "NoValidPixels";
    case ErrorCode::kMissingCounterpart: return "MissingCounterpart";
    case ErrorCode::kPrimitiveOutOfBounds: return "PrimitiveOutOfBounds";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kOutOfRangeCoordinate: return "OutOfRangeCoordinate";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

/// Single exception type for the library. `position` is set for parse errors
/// (1-based field index within the offending line).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> position = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message),
        position_(position) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  std::optional<std::size_t> position() const noexcept { return position_; }

 private:
  ErrorCode code_;
  std::string detail_;
  std::optional<std::size_t> position_;
};

}  // namespace roadchar
