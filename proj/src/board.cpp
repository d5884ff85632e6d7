#include "matchboard/board.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <random>

namespace matchboard {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kOpen: return "open";
    case EventKind::kMove: return "move";
    case EventKind::kLock: return "lock";
    case EventKind::kUnlock: return "unlock";
    case EventKind::kCapacity: return "capacity";
    case EventKind::kReoptimize: return "reoptimize";
  }
  return "open";
}

EventKind parse_event_kind(std::string_view text) {
  for (EventKind kind : {EventKind::kOpen, EventKind::kMove, EventKind::kLock, EventKind::kUnlock,
                         EventKind::kCapacity, EventKind::kReoptimize}) {
    if (to_string(kind) == text) return kind;
  }
  throw Error(ErrorCode::kDomainError, "unknown event kind '" + std::string(text) + "'");
}

std::string utc_timestamp_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t seconds = std::chrono::system_clock::to_time_t(now);
  auto millis = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&seconds, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(millis));
  return buf;
}

namespace {

int target_index(const PlacementEvaluator& eval, std::string_view target) {
  if (target == kUnassigned) return kUnplaced;
  return static_cast<int>(eval.index().location_at(target));
}

void record(BoardState& state, EventKind kind, nlohmann::json payload, const EventContext& context) {
  state.revision += 1;
  state.event_log.push_back({state.revision, context.timestamp.empty() ? utc_timestamp_now() : context.timestamp,
                             kind, std::move(payload), context.actor});
}

// Score change of moving case `c` to `target`; exactly zero for a move onto its current spot.
double move_delta(const PlacementEvaluator& eval, std::span<const int> placement, std::size_t c, int target) {
  if (placement[c] == target) return 0.0;
  return (eval.pair_score(c, target) - eval.pair_score(c, placement[c])) +
         eval.bonus() * eval.link_delta(placement, c, target);
}

[[noreturn]] void throw_solve_failure(const Assignment& result) {
  if (result.status == SolveStatus::kInfeasibleLocks) {
    nlohmann::json locations = nlohmann::json::array();
    nlohmann::json breaches = nlohmann::json::array();
    for (const CapacityBreach& b : result.lock_breaches) {
      if (locations.empty() || locations.back() != b.location) locations.push_back(b.location);
      breaches.push_back({{"location", b.location},
                          {"dimension", to_string(b.dimension)},
                          {"used", b.used},
                          {"capacity", b.capacity}});
    }
    throw Error(ErrorCode::kInfeasibleLocks, "locked cases exceed capacity at " + locations.dump(),
                {{"locations", locations}, {"breaches", breaches}});
  }
  throw Error(ErrorCode::kInfeasible, "no placement satisfies the constraints");
}

}  // namespace

std::vector<Violation> compute_violations(const SolveRequest& request, std::span<const int> placement) {
  PlacementEvaluator eval(request);
  std::vector<Capacity> used(eval.num_locations());
  std::vector<Violation> out;
  for (std::size_t c = 0; c < placement.size(); ++c) {
    if (placement[c] == kUnplaced) continue;
    used[placement[c]].cases += 1;
    used[placement[c]].members += eval.instance().cases[c].member_count;
  }
  for (std::size_t l = 0; l < used.size(); ++l) {
    const std::string& id = eval.instance().locations[l].id;
    if (used[l].cases > eval.effective_capacity(l).cases) {
      out.push_back({Violation::Kind::kOverCapacity, id, "", CapacityDimension::kCases});
    }
    if (used[l].members > eval.effective_capacity(l).members) {
      out.push_back({Violation::Kind::kOverCapacity, id, "", CapacityDimension::kMembers});
    }
  }
  for (std::size_t c = 0; c < placement.size(); ++c) {
    if (placement[c] != kUnplaced && !eval.matrix().is_compatible(c, placement[c])) {
      out.push_back({Violation::Kind::kIncompatible, eval.instance().locations[placement[c]].id,
                     eval.instance().cases[c].id, CapacityDimension::kCases});
    }
  }
  return out;
}

double recompute_total(const BoardState& state) {
  return PlacementEvaluator(state.request).objective(state.placement);
}

std::string placement_location_id(const BoardState& state, std::size_t case_index) {
  int l = state.placement[case_index];
  return l == kUnplaced ? std::string(kUnassigned) : state.instance().locations[l].id;
}

BoardState open_session(std::shared_ptr<const Instance> instance, std::shared_ptr<const ScoreMatrix> matrix,
                        const OpenOptions& options, const EventContext& context,
                        const SolveOptions& solve_options) {
  BoardState state;
  state.session_id = options.session_id;
  state.opening = options;
  state.request.instance = std::move(instance);
  state.request.matrix = std::move(matrix);
  state.request.locks = options.locks;
  state.request.capacity_overrides = options.capacity_overrides;
  state.request.cross_ref_bonus = options.cross_ref_bonus;
  state.request.allow_unassigned = options.allow_unassigned;

  Assignment result = solve(state.request, solve_options);
  if (result.status == SolveStatus::kInfeasibleLocks || result.status == SolveStatus::kInfeasible) {
    throw_solve_failure(result);
  }
  state.placement = std::move(result.placement);
  state.total_score = result.objective;
  state.violations = compute_violations(state.request, state.placement);
  state.revision = 0;
  state.event_log.push_back({0, context.timestamp.empty() ? utc_timestamp_now() : context.timestamp,
                             EventKind::kOpen, {{"status", to_string(result.status)}}, context.actor});
  return state;
}

BoardState apply_move(const BoardState& state, std::string_view case_id, std::string_view target,
                      const EventContext& context) {
  PlacementEvaluator eval(state.request);
  std::size_t c = eval.index().case_at(case_id);
  int to = target_index(eval, target);
  if (state.request.locks.contains(std::string(case_id))) {
    throw Error(ErrorCode::kMoveLocked, "case " + std::string(case_id) + " is locked", {{"case", case_id}});
  }
  BoardState next = state;
  next.total_score = state.total_score + move_delta(eval, state.placement, c, to);
  next.placement[c] = to;
  next.violations = compute_violations(next.request, next.placement);
  record(next, EventKind::kMove, {{"case", case_id}, {"target", target}}, context);
  return next;
}

WhatIf whatif_score(const BoardState& state, std::string_view case_id, std::string_view target) {
  PlacementEvaluator eval(state.request);
  std::size_t c = eval.index().case_at(case_id);
  int to = target_index(eval, target);
  WhatIf out;
  out.pair_score = eval.pair_score(c, to);
  out.projected_total = state.total_score + move_delta(eval, state.placement, c, to);
  if (to != kUnplaced) {
    out.compatible = eval.matrix().is_compatible(c, to);
    out.reasons = eval.matrix().reasons_at(c, to);
    Capacity cap = eval.effective_capacity(to);
    int cases = 0;
    int members = 0;
    for (std::size_t d = 0; d < state.placement.size(); ++d) {
      if (d == c || state.placement[d] != to) continue;
      cases += 1;
      members += eval.instance().cases[d].member_count;
    }
    cases += 1;
    members += eval.instance().cases[c].member_count;
    out.would_violate_capacity = cases > cap.cases || members > cap.members;
  }
  return out;
}

BoardState toggle_lock(const BoardState& state, std::string_view case_id, const EventContext& context) {
  PlacementEvaluator eval(state.request);
  std::size_t c = eval.index().case_at(case_id);
  BoardState next = state;
  const std::string id(case_id);
  if (auto it = next.request.locks.find(id); it != next.request.locks.end()) {
    nlohmann::json payload = {{"case", id}, {"location", it->second}};
    next.request.locks.erase(it);
    record(next, EventKind::kUnlock, std::move(payload), context);
    return next;
  }
  if (state.placement[c] == kUnplaced) {
    throw Error(ErrorCode::kLockUnassigned, "case " + id + " is not placed and cannot be locked", {{"case", id}});
  }
  std::string location = placement_location_id(state, c);
  next.request.locks[id] = location;
  record(next, EventKind::kLock, {{"case", id}, {"location", location}}, context);
  return next;
}

BoardState adjust_capacity(const BoardState& state, std::string_view location_id, CapacityDimension dimension,
                           int delta, const EventContext& context) {
  PlacementEvaluator eval(state.request);
  std::size_t l = eval.index().location_at(location_id);
  Capacity cap = eval.effective_capacity(l);
  int& field = dimension == CapacityDimension::kCases ? cap.cases : cap.members;
  if (static_cast<long long>(field) + delta < 0) {
    throw Error(ErrorCode::kNegativeCapacity, "capacity of " + std::string(location_id) + " would become negative",
                {{"location", location_id}, {"dimension", to_string(dimension)}, {"current", field}, {"delta", delta}});
  }
  field += delta;

  BoardState next = state;
  const Location& base = state.instance().locations[l];
  if (cap == Capacity{base.case_capacity, base.member_capacity}) {
    next.request.capacity_overrides.erase(std::string(location_id));
  } else {
    next.request.capacity_overrides[std::string(location_id)] = cap;
  }
  next.violations = compute_violations(next.request, next.placement);
  record(next, EventKind::kCapacity,
         {{"location", location_id}, {"dimension", to_string(dimension)}, {"delta", delta}}, context);
  return next;
}

BoardState reoptimize(const BoardState& state, const EventContext& context, const SolveOptions& solve_options) {
  Assignment result = solve(state.request, solve_options);
  if (result.status == SolveStatus::kInfeasibleLocks || result.status == SolveStatus::kInfeasible) {
    throw_solve_failure(result);
  }
  BoardState next = state;
  next.placement = std::move(result.placement);
  next.total_score = result.objective;
  next.violations = compute_violations(next.request, next.placement);
  record(next, EventKind::kReoptimize,
         {{"status", to_string(result.status)}, {"nodes_explored", result.stats.nodes_explored}}, context);
  return next;
}

CrossReferenceView cross_reference_view(const BoardState& state, std::string_view case_id) {
  PlacementEvaluator eval(state.request);
  std::size_t c = eval.index().case_at(case_id);
  const int here = state.placement[c];
  CrossReferenceView view;
  for (std::size_t d : eval.case_partners(c)) {
    int there = state.placement[d];
    view.linked_cases.push_back(
        {state.instance().cases[d].id, placement_location_id(state, d), here != kUnplaced && there == here});
  }
  for (std::size_t l : eval.linked_locations(c)) {
    view.linked_locations.push_back({state.instance().locations[l].id, here == static_cast<int>(l)});
  }
  return view;
}

BoardState replay(const BoardState& state, std::optional<std::int64_t> up_to) {
  if (state.event_log.empty() || state.event_log.front().kind != EventKind::kOpen) {
    throw Error(ErrorCode::kDomainError, "event log does not start with an open event");
  }
  const BoardEvent& first = state.event_log.front();
  BoardState current =
      open_session(state.request.instance, state.request.matrix, state.opening, {first.actor, first.timestamp});
  for (std::size_t i = 1; i < state.event_log.size(); ++i) {
    const BoardEvent& event = state.event_log[i];
    if (up_to && event.revision > *up_to) break;
    EventContext context{event.actor, event.timestamp};
    const nlohmann::json& p = event.payload;
    switch (event.kind) {
      case EventKind::kMove:
        current = apply_move(current, p.at("case").get<std::string>(), p.at("target").get<std::string>(), context);
        break;
      case EventKind::kLock:
      case EventKind::kUnlock:
        current = toggle_lock(current, p.at("case").get<std::string>(), context);
        break;
      case EventKind::kCapacity:
        current = adjust_capacity(current, p.at("location").get<std::string>(),
                                  parse_capacity_dimension(p.at("dimension").get<std::string>()),
                                  p.at("delta").get<int>(), context);
        break;
      case EventKind::kReoptimize:
        current = reoptimize(current, context);
        break;
      case EventKind::kOpen:
        throw Error(ErrorCode::kDomainError, "unexpected open event inside the log");
    }
    if (current.event_log.back().kind != event.kind) {
      throw Error(ErrorCode::kDomainError, "replayed event kind diverged at revision " +
                                               std::to_string(event.revision));
    }
    // Restore the recorded payload so statistics such as node counts compare exactly.
    current.event_log.back().payload = event.payload;
  }
  return current;
}

std::string generate_session_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
  return buf;
}

// ---------------------------------------------------------------------------
// SessionManager

std::shared_ptr<SessionManager::Entry> SessionManager::entry(const std::string& session_id) const {
  std::lock_guard lock(table_mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    throw Error(ErrorCode::kSessionNotFound, "no session '" + session_id + "'", {{"session_id", session_id}});
  }
  return it->second;
}

SessionManager::Snapshot SessionManager::open(std::shared_ptr<const Instance> instance,
                                              std::shared_ptr<const ScoreMatrix> matrix, OpenOptions options,
                                              const EventContext& context) {
  if (options.session_id.empty()) options.session_id = generate_session_id();
  return insert(open_session(std::move(instance), std::move(matrix), options, context));
}

SessionManager::Snapshot SessionManager::insert(BoardState state) {
  auto e = std::make_shared<Entry>();
  const std::string id = state.session_id;
  e->current = std::make_shared<const BoardState>(std::move(state));
  Snapshot snapshot = e->current;
  std::lock_guard lock(table_mutex_);
  sessions_[id] = std::move(e);
  return snapshot;
}

SessionManager::Snapshot SessionManager::get(const std::string& session_id) const {
  auto e = entry(session_id);
  std::lock_guard lock(e->pointer);
  return e->current;
}

bool SessionManager::contains(const std::string& session_id) const {
  std::lock_guard lock(table_mutex_);
  return sessions_.contains(session_id);
}

std::vector<std::string> SessionManager::session_ids() const {
  std::lock_guard lock(table_mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, e] : sessions_) ids.push_back(id);
  return ids;
}

SessionManager::Snapshot SessionManager::mutate(const std::string& session_id, std::int64_t expected_revision,
                                                const std::function<BoardState(const BoardState&)>& mutation) {
  auto e = entry(session_id);
  std::lock_guard writer(e->writer);
  Snapshot current;
  {
    std::lock_guard lock(e->pointer);
    current = e->current;
  }
  if (current->revision != expected_revision) {
    throw Error(ErrorCode::kConflict,
                "stale revision " + std::to_string(expected_revision) + "; current is " +
                    std::to_string(current->revision),
                {{"current_revision", current->revision}, {"expected_revision", expected_revision}});
  }
  auto next = std::make_shared<const BoardState>(mutation(*current));
  std::lock_guard lock(e->pointer);
  e->current = next;
  return next;
}

}  // namespace matchboard
