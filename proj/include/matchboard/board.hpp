#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "matchboard/solver.hpp"

namespace matchboard {

enum class EventKind { kOpen, kMove, kLock, kUnlock, kCapacity, kReoptimize };

std::string_view to_string(EventKind kind);
EventKind parse_event_kind(std::string_view text);

struct BoardEvent {
  std::int64_t revision = 0;
  std::string timestamp;  // UTC ISO-8601
  EventKind kind = EventKind::kOpen;
  nlohmann::json payload = nlohmann::json::object();
  std::string actor;

  bool operator==(const BoardEvent&) const = default;
};

struct Violation {
  enum class Kind { kOverCapacity, kIncompatible };
  Kind kind = Kind::kOverCapacity;
  std::string location;
  std::string case_id;  // incompatible only
  CapacityDimension dimension = CapacityDimension::kCases;  // over_capacity only

  bool operator==(const Violation&) const = default;
};

// Who performs a mutation and when. An empty timestamp means "now".
struct EventContext {
  std::string actor = "system";
  std::string timestamp;
};

std::string utc_timestamp_now();

struct OpenOptions {
  std::string session_id;
  double cross_ref_bonus = 0.0;
  bool allow_unassigned = true;
  std::map<std::string, std::string> locks;
  std::map<std::string, Capacity> capacity_overrides;

  bool operator==(const OpenOptions&) const = default;
};

struct BoardState {
  std::string session_id;
  OpenOptions opening;   // options the session was opened with; replay starts here
  SolveRequest request;  // live-edited: locks, capacity overrides
  Placement placement;
  double total_score = 0.0;
  std::vector<Violation> violations;
  std::int64_t revision = 0;
  std::vector<BoardEvent> event_log;

  const Instance& instance() const { return *request.instance; }
  const ScoreMatrix& matrix() const { return *request.matrix; }
  bool operator==(const BoardState&) const = default;
};

BoardState open_session(std::shared_ptr<const Instance> instance, std::shared_ptr<const ScoreMatrix> matrix,
                        const OpenOptions& options, const EventContext& context = {},
                        const SolveOptions& solve_options = {});

// `target` is a location id or kUnassigned.
BoardState apply_move(const BoardState& state, std::string_view case_id, std::string_view target,
                      const EventContext& context = {});

struct WhatIf {
  double pair_score = 0.0;
  double projected_total = 0.0;
  bool compatible = true;
  std::vector<IncompatibilityReason> reasons;
  bool would_violate_capacity = false;
};

WhatIf whatif_score(const BoardState& state, std::string_view case_id, std::string_view target);

BoardState toggle_lock(const BoardState& state, std::string_view case_id, const EventContext& context = {});

BoardState adjust_capacity(const BoardState& state, std::string_view location_id, CapacityDimension dimension,
                           int delta, const EventContext& context = {});

BoardState reoptimize(const BoardState& state, const EventContext& context = {},
                      const SolveOptions& solve_options = {});

struct CaseLink {
  std::string case_id;
  std::string location;  // where the linked case sits, or kUnassigned
  bool co_placed = false;
};

struct LocationLink {
  std::string location;
  bool co_placed = false;
};

struct CrossReferenceView {
  std::vector<CaseLink> linked_cases;
  std::vector<LocationLink> linked_locations;
};

CrossReferenceView cross_reference_view(const BoardState& state, std::string_view case_id);

// Recomputations from scratch, independent of the incrementally maintained fields.
double recompute_total(const BoardState& state);
std::vector<Violation> compute_violations(const SolveRequest& request, std::span<const int> placement);

// Rebuilds the board by re-running its event log from the opening state. With `up_to` set, stops
// after that revision (undo).
BoardState replay(const BoardState& state, std::optional<std::int64_t> up_to = std::nullopt);

std::string placement_location_id(const BoardState& state, std::size_t case_index);

// Serialises writers per session with optimistic revision checks; readers get immutable snapshots.
class SessionManager {
 public:
  using Snapshot = std::shared_ptr<const BoardState>;

  Snapshot open(std::shared_ptr<const Instance> instance, std::shared_ptr<const ScoreMatrix> matrix,
                OpenOptions options, const EventContext& context = {});
  Snapshot insert(BoardState state);
  Snapshot get(const std::string& session_id) const;
  bool contains(const std::string& session_id) const;
  std::vector<std::string> session_ids() const;

  // Applies `mutation` to the current state when its revision equals `expected_revision`;
  // otherwise throws kConflict carrying the current revision.
  Snapshot mutate(const std::string& session_id, std::int64_t expected_revision,
                  const std::function<BoardState(const BoardState&)>& mutation);

 private:
  struct Entry {
    std::mutex writer;
    mutable std::mutex pointer;
    Snapshot current;
  };
  std::shared_ptr<Entry> entry(const std::string& session_id) const;

  mutable std::mutex table_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

std::string generate_session_id();

}  // namespace matchboard
