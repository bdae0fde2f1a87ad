#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace affordsim {

enum class ErrorCode {
  kUsage,
  kFileNotFound,
  kIo,
  kParse,
  kEmptyMesh,
  kZeroArea,
  kEmptyFootprint,
  kDegenerateAabb,
  kOverlapAtSpawn,
  kNonFiniteState,
  kKeyframesInPast,
  kScheduleOverflow,
  kInvalidSpec,
  kInvalidConfig,
  kNotAContainer,
  kDuplicatePath,
  kMissingMeshFile,
  kSingleClassInput,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUsage: return "usage";
    case ErrorCode::kFileNotFound: return "file-not-found";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kParse: return "parse-error";
    case ErrorCode::kEmptyMesh: return "empty-mesh";
    case ErrorCode::kZeroArea: return "zero-total-area";
    case ErrorCode::kEmptyFootprint: return "empty-footprint";
    case ErrorCode::kDegenerateAabb: return "degenerate-aabb";
    case ErrorCode::kOverlapAtSpawn: return "overlap-at-spawn";
    case ErrorCode::kNonFiniteState: return "non-finite-state";
    case ErrorCode::kKeyframesInPast: return "keyframes-in-past";
    case ErrorCode::kScheduleOverflow: return "schedule-overflow";
    case ErrorCode::kInvalidSpec: return "invalid-spec";
    case ErrorCode::kInvalidConfig: return "invalid-config";
    case ErrorCode::kNotAContainer: return "not-a-container";
    case ErrorCode::kDuplicatePath: return "duplicate-path";
    case ErrorCode::kMissingMeshFile: return "missing-mesh-file";
    case ErrorCode::kSingleClassInput: return "single-class-input";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto a stable exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace affordsim
