#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "matchboard/board.hpp"
#include "matchboard/scheduler.hpp"
#include "matchboard/score.hpp"
#include "matchboard/solver.hpp"

namespace matchboard {

inline constexpr int kSnapshotFormatVersion = 1;
inline constexpr int kModelFormatVersion = 1;
inline constexpr std::string_view kSnapshotFormat = "matchboard-snapshot";
inline constexpr std::string_view kModelFormat = "matchboard-model";

// nlohmann ADL hooks. from_json throws nlohmann exceptions or matchboard::Error on bad input.
void to_json(nlohmann::json& j, const AttributeBag& bag);
void from_json(const nlohmann::json& j, AttributeBag& bag);
void to_json(nlohmann::json& j, const CrossRef& ref);
void from_json(const nlohmann::json& j, CrossRef& ref);
void to_json(nlohmann::json& j, const Case& c);
void from_json(const nlohmann::json& j, Case& c);
void to_json(nlohmann::json& j, const Location& location);
void from_json(const nlohmann::json& j, Location& location);
void to_json(nlohmann::json& j, const Instance& instance);
void from_json(const nlohmann::json& j, Instance& instance);
void to_json(nlohmann::json& j, const ScoreMatrix& matrix);
void from_json(const nlohmann::json& j, ScoreMatrix& matrix);
void to_json(nlohmann::json& j, const Capacity& capacity);
void from_json(const nlohmann::json& j, Capacity& capacity);
void to_json(nlohmann::json& j, const OpenOptions& options);
void from_json(const nlohmann::json& j, OpenOptions& options);
void to_json(nlohmann::json& j, const BoardEvent& event);
void from_json(const nlohmann::json& j, BoardEvent& event);
void to_json(nlohmann::json& j, const Violation& violation);
void from_json(const nlohmann::json& j, Violation& violation);
void to_json(nlohmann::json& j, const ValidationReport& report);
void to_json(nlohmann::json& j, const WhatIf& whatif);
void to_json(nlohmann::json& j, const CrossReferenceView& view);
void to_json(nlohmann::json& j, const SubscriptionRow& row);
void to_json(nlohmann::json& j, const Schedule& schedule);
void to_json(nlohmann::json& j, const Meeting& meeting);
void from_json(const nlohmann::json& j, Meeting& meeting);
void to_json(nlohmann::json& j, const HistoryRecord& record);
void from_json(const nlohmann::json& j, HistoryRecord& record);
void to_json(nlohmann::json& j, const ScheduleConfig& config);
void from_json(const nlohmann::json& j, ScheduleConfig& config);

// Versioned model document {format, version, schema, weights, intercept, meta}.
nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);  // throws kParseError

nlohmann::json assignment_to_json(const Assignment& assignment, const Instance& instance);
nlohmann::json error_to_json(const Error& error);

// Client-facing view of a board: placements by id, violations, locks, subscription and log.
nlohmann::json board_view(const BoardState& state);

std::string snapshot_session(const BoardState& state);
// Throws kSnapshotError on malformed, truncated, inconsistent or version-mismatched input.
BoardState restore_session(std::string_view bytes);

enum class ExportFormat { kCsv, kJson };
ExportFormat parse_export_format(std::string_view text);  // throws kInvalidRequest

// One row per case (case_id, location_id, pair_score, locked, violations) and a TOTAL footer.
std::string export_assignment(const BoardState& state, ExportFormat format);

// case_id,location_id,score,compatible,reasons
std::string format_score_matrix_csv(const Instance& instance, const ScoreMatrix& matrix);

std::string violation_label(const Violation& violation);

}  // namespace matchboard
