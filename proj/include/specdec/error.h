#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace specdec {

enum class ErrorCode {
  kAllZero,
  kLengthMismatch,
  kSupportViolation,
  kNoResidualMass,
  kDegenerate,
  kBadParam,
  kEmptySupport,
  kInsufficientSupport,
  kExhaustedAlphabet,
  kInvalidTree,
  kNoData,
  kTooLarge,
  kZeroEntropy,
  kInvalidM,
  kConfig,
  kParse,
  kIo,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kAllZero: return "AllZero";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kSupportViolation: return "SupportViolation";
    case ErrorCode::kNoResidualMass: return "NoResidualMass";
    case ErrorCode::kDegenerate: return "Degenerate";
    case ErrorCode::kBadParam: return "BadParam";
    case ErrorCode::kEmptySupport: return "EmptySupport";
    case ErrorCode::kInsufficientSupport: return "InsufficientSupport";
    case ErrorCode::kExhaustedAlphabet: return "ExhaustedAlphabet";
    case ErrorCode::kInvalidTree: return "InvalidTree";
    case ErrorCode::kNoData: return "NoData";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kZeroEntropy: return "ZeroEntropy";
    case ErrorCode::kInvalidM: return "InvalidM";
    case ErrorCode::kConfig: return "Config";
    case ErrorCode::kParse: return "Parse";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace specdec
