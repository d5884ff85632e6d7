#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stop_token>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "matchboard/model.hpp"

namespace matchboard {

inline constexpr std::string_view kUnassigned = "UNASSIGNED";
// Placement entries are location indices; kUnplaced marks an unassigned case.
inline constexpr int kUnplaced = -1;

using Placement = std::vector<int>;  // aligned with Instance::cases

struct Capacity {
  int cases = 0;    // C
  int members = 0;  // R

  bool operator==(const Capacity&) const = default;
};

enum class CapacityDimension { kCases, kMembers };

std::string_view to_string(CapacityDimension dimension);
CapacityDimension parse_capacity_dimension(std::string_view text);

struct SolveRequest {
  std::shared_ptr<const Instance> instance;
  std::shared_ptr<const ScoreMatrix> matrix;
  std::map<std::string, std::string> locks;  // case id -> location id
  std::map<std::string, Capacity> capacity_overrides;
  double cross_ref_bonus = 0.0;
  bool allow_unassigned = true;

  bool operator==(const SolveRequest& other) const;
};

enum class SolveStatus { kOptimal, kInfeasibleLocks, kInfeasible, kStopped };

std::string_view to_string(SolveStatus status);

struct CapacityBreach {
  std::string location;
  CapacityDimension dimension = CapacityDimension::kCases;
  int used = 0;
  int capacity = 0;

  bool operator==(const CapacityBreach&) const = default;
};

struct SolveStats {
  std::int64_t nodes_explored = 0;
  double best_bound = 0.0;  // root upper bound on the objective
  double elapsed_seconds = 0.0;
};

struct Assignment {
  Placement placement;
  double objective = 0.0;
  SolveStatus status = SolveStatus::kOptimal;
  std::vector<CapacityBreach> lock_breaches;  // set when status == kInfeasibleLocks
  SolveStats stats;
};

struct SolveOptions {
  std::stop_token stop;
  std::optional<std::chrono::milliseconds> time_limit;
};

// Pair scores, co-placement links, and effective capacities of a request, with the canonical
// objective used by every solver and by the board. The objective sums its terms in ascending
// order so that placements with equal score multisets evaluate to bit-identical totals.
class PlacementEvaluator {
 public:
  // Validates the request: matrix shape, lock and override ids, non-negative overrides.
  explicit PlacementEvaluator(const SolveRequest& request);

  const Instance& instance() const { return *instance_; }
  const ScoreMatrix& matrix() const { return *matrix_; }
  const InstanceIndex& index() const { return index_; }
  std::size_t num_cases() const { return instance_->cases.size(); }
  std::size_t num_locations() const { return instance_->locations.size(); }

  Capacity effective_capacity(std::size_t location) const { return capacity_[location]; }
  std::optional<int> locked_location(std::size_t c) const;
  double bonus() const { return bonus_; }
  bool allow_unassigned() const { return allow_unassigned_; }

  double pair_score(std::size_t c, int location) const {
    return location == kUnplaced ? 0.0 : matrix_->score(c, static_cast<std::size_t>(location));
  }
  // Deduplicated co-placement partners and linked locations of a case.
  const std::vector<std::size_t>& case_partners(std::size_t c) const { return partners_[c]; }
  const std::vector<std::size_t>& linked_locations(std::size_t c) const { return linked_locations_[c]; }
  std::size_t num_links() const { return num_pair_links_ + num_location_links_; }

  double objective(std::span<const int> placement) const;
  int satisfied_links(std::span<const int> placement) const;
  // Change in satisfied-link count if case `c` moved to `target`.
  int link_delta(std::span<const int> placement, std::size_t c, int target) const;

  bool fits(std::span<const int> placement) const;
  std::vector<CapacityBreach> lock_breaches() const;

  // Lexicographic rank of a placement entry: locations by id, UNASSIGNED last.
  int location_rank(int location) const {
    return location == kUnplaced ? static_cast<int>(num_locations()) : location_rank_[location];
  }
  const std::vector<std::size_t>& cases_by_id() const { return cases_by_id_; }
  // True when `a` precedes `b` in the deterministic tie-break order.
  bool lex_less(std::span<const int> a, std::span<const int> b) const;
  // Objective first, then tie-break order.
  bool better(double objective_a, std::span<const int> a, double objective_b, std::span<const int> b) const;

 private:
  std::shared_ptr<const Instance> instance_;
  std::shared_ptr<const ScoreMatrix> matrix_;
  InstanceIndex index_;
  std::vector<Capacity> capacity_;
  std::vector<int> locks_;  // kUnplaced when not locked
  std::vector<std::vector<std::size_t>> partners_;
  std::vector<std::vector<std::size_t>> linked_locations_;
  std::size_t num_pair_links_ = 0;
  std::size_t num_location_links_ = 0;
  std::vector<int> location_rank_;
  std::vector<std::size_t> cases_by_id_;
  double bonus_ = 0.0;
  bool allow_unassigned_ = true;
};

// Exact maximum-objective placement by depth-first branch-and-bound.
Assignment solve(const SolveRequest& request, const SolveOptions& options = {});

// Exhaustive reference solver; limited to 8 cases and 4 locations.
Assignment brute_force_oracle(const SolveRequest& request);

// Feasible (not necessarily optimal) placement: cases by decreasing best score, each into its
// best compatible location with room.
Assignment greedy_warm_start(const SolveRequest& request);

struct SubscriptionRow {
  std::string location;
  int placed_cases = 0;
  int placed_members = 0;
  int case_capacity = 0;
  int member_capacity = 0;
  double fill_ratio = 0.0;
  bool undersubscribed = false;
  bool full = false;
  bool over = false;

  bool operator==(const SubscriptionRow&) const = default;
};

std::vector<SubscriptionRow> subscription_report(std::span<const int> placement, const SolveRequest& request);

}  // namespace matchboard
