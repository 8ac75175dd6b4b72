#pragma once

#include <stdexcept>
#include <string>

namespace slowlight {

/// Failure categories. The numeric value doubles as the CLI exit code.
enum class ErrorCode : int {
  kInvalidParameter = 10,
  kDomain = 11,
  kNumeric = 12,
  kSingularity = 13,
  kNoStop = 14,
  kNoRealRoot = 15,
  kDegenerate = 16,
  kFiniteEscape = 17,
  kInsufficientAsymptote = 18,
  kInstability = 19,
  kInconsistency = 20,
  kAmbiguity = 21,
  kGridTooSmall = 22,
  kEmptyMask = 23,
  kConfig = 24,
  kIo = 25,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameter: return "invalid-parameter";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kNumeric: return "numeric";
    case ErrorCode::kSingularity: return "singularity";
    case ErrorCode::kNoStop: return "no-stop";
    case ErrorCode::kNoRealRoot: return "no-real-root";
    case ErrorCode::kDegenerate: return "degenerate";
    case ErrorCode::kFiniteEscape: return "finite-escape";
    case ErrorCode::kInsufficientAsymptote: return "insufficient-asymptote";
    case ErrorCode::kInstability: return "numeric-instability";
    case ErrorCode::kInconsistency: return "inconsistency";
    case ErrorCode::kAmbiguity: return "ambiguity";
    case ErrorCode::kGridTooSmall: return "grid-too-small";
    case ErrorCode::kEmptyMask: return "empty-mask";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

inline int exit_code(ErrorCode code) { return static_cast<int>(code); }

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace slowlight
