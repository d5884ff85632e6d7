#include "matchboard/error.hpp"

namespace matchboard {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDomainError: return "DOMAIN_ERROR";
    case ErrorCode::kUnknownId: return "UNKNOWN_ID";
    case ErrorCode::kValidationFailed: return "VALIDATION_FAILED";
    case ErrorCode::kParseError: return "PARSE_ERROR";
    case ErrorCode::kSnapshotError: return "SNAPSHOT_ERROR";
    case ErrorCode::kDegenerateLabels: return "DEGENERATE_LABELS";
    case ErrorCode::kInvalidFeature: return "INVALID_FEATURE";
    case ErrorCode::kInfeasibleLocks: return "INFEASIBLE_LOCKS";
    case ErrorCode::kInfeasible: return "INFEASIBLE";
    case ErrorCode::kMoveLocked: return "MOVE_LOCKED";
    case ErrorCode::kLockUnassigned: return "LOCK_UNASSIGNED";
    case ErrorCode::kNegativeCapacity: return "NEGATIVE_CAPACITY";
    case ErrorCode::kConflict: return "CONFLICT";
    case ErrorCode::kSessionNotFound: return "SESSION_NOT_FOUND";
    case ErrorCode::kTooManyPerDay: return "TOO_MANY_PER_DAY";
    case ErrorCode::kTooFewMeetings: return "TOO_FEW_MEETINGS";
    case ErrorCode::kCountPartitionImpossible: return "COUNT_PARTITION_IMPOSSIBLE";
    case ErrorCode::kMeetingTooLong: return "MEETING_TOO_LONG";
    case ErrorCode::kTotalMinutesExceeded: return "TOTAL_MINUTES_EXCEEDED";
    case ErrorCode::kInvalidConfig: return "INVALID_CONFIG";
    case ErrorCode::kInvalidRequest: return "INVALID_REQUEST";
    case ErrorCode::kRevisionRequired: return "REVISION_REQUIRED";
    case ErrorCode::kJobNotFound: return "JOB_NOT_FOUND";
    case ErrorCode::kReplayMismatch: return "REPLAY_MISMATCH";
    case ErrorCode::kIoError: return "IO_ERROR";
    case ErrorCode::kInternal: return "INTERNAL";
  }
  return "INTERNAL";
}

}  // namespace matchboard
