#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace matchboard {

// Stable machine codes. Each engine failure maps to exactly one of these; the
// spelling returned by to_string() is part of the wire contract.
enum class ErrorCode {
  kDomainError,
  kUnknownId,
  kValidationFailed,
  kParseError,
  kSnapshotError,
  kDegenerateLabels,
  kInvalidFeature,
  kInfeasibleLocks,
  kInfeasible,
  kMoveLocked,
  kLockUnassigned,
  kNegativeCapacity,
  kConflict,
  kSessionNotFound,
  kTooManyPerDay,
  kTooFewMeetings,
  kCountPartitionImpossible,
  kMeetingTooLong,
  kTotalMinutesExceeded,
  kInvalidConfig,
  kInvalidRequest,
  kRevisionRequired,
  kJobNotFound,
  kReplayMismatch,
  kIoError,
  kInternal,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, nlohmann::json details = nlohmann::json::object())
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const { return code_; }
  const nlohmann::json& details() const { return details_; }

 private:
  ErrorCode code_;
  nlohmann::json details_;
};

}  // namespace matchboard
