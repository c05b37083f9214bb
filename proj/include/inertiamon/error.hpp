#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace inertiamon {

enum class ErrorCode {
  kWindowTooSparse,
  kNonFinite,
  kMissingVoltage,
  kRocofBelowFloor,
  kInsufficientData,
  kNonPositiveTruth,
  kPlantMismatch,
  kInvalidScenario,
  kRestrictionViolated,
  kInsufficientRecords,
  kInvalidConfig,
  kParseError,
  kNonMonotonicTime,
  kIo,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kWindowTooSparse: return "WindowTooSparse";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kMissingVoltage: return "MissingVoltage";
    case ErrorCode::kRocofBelowFloor: return "RocofBelowFloor";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kNonPositiveTruth: return "NonPositiveTruth";
    case ErrorCode::kPlantMismatch: return "PlantMismatch";
    case ErrorCode::kInvalidScenario: return "InvalidScenario";
    case ErrorCode::kRestrictionViolated: return "RestrictionViolated";
    case ErrorCode::kInsufficientRecords: return "InsufficientRecords";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kNonMonotonicTime: return "NonMonotonicTime";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

// Every failure in the library surfaces as an Error carrying a machine-readable
// code. Parse failures also carry the 1-based line number (0 when unknown).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::size_t line = 0)
      : std::runtime_error(format(code, what, line)), code_(code), line_(line), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }
  // The message without the code and line prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  static std::string format(ErrorCode code, const std::string& what, std::size_t line) {
    std::string out(to_string(code));
    if (line != 0) out += " (line " + std::to_string(line) + ")";
    if (!what.empty()) out += ": " + what;
    return out;
  }

  ErrorCode code_;
  std::size_t line_;
  std::string detail_;
};

}  // namespace inertiamon
