#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "matchboard/error.hpp"

namespace matchboard {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr std::uint64_t kDefaultScheduleSeed = 42;

struct Meeting {
  std::string client_id;
  double latitude = 0.0;
  double longitude = 0.0;
  int duration_minutes = 60;
  bool selected = true;

  bool operator==(const Meeting&) const = default;
};

struct ScheduleConfig {
  int days = 5;
  int min_per_day = 3;
  int max_per_day = 9;
  int max_minutes_per_day = 360;

  bool operator==(const ScheduleConfig&) const = default;
};

struct Schedule {
  std::vector<std::vector<std::string>> day_groups;  // one entry per configured day, possibly empty
  double cost = 0.0;                                 // kilometres
  bool feasible = false;
  std::vector<std::string> violations;               // e.g. "day 2: TOO_FEW_MEETINGS"

  bool operator==(const Schedule&) const = default;
};

struct FeasibilityReport {
  std::vector<ErrorCode> violations;
  std::size_t meeting_count = 0;

  bool ok() const { return violations.empty(); }
};

struct DedupResult {
  std::vector<Meeting> unique;
  std::size_t duplicate_count = 0;
};

double haversine_km(double lat1, double lon1, double lat2, double lon2);

DedupResult deduplicate(std::span<const Meeting> meetings);

// Necessary conditions on the selected meetings; no search.
FeasibilityReport check_feasibility(std::span<const Meeting> meetings, const ScheduleConfig& config);

// Sum over days of the great-circle distance from each meeting to its day's mean position.
// Throws kUnknownId for ids missing from `meetings`.
double schedule_cost(const Schedule& schedule, std::span<const Meeting> meetings);

// Fills cost, feasible and violations of `schedule` from its groups.
Schedule evaluate_schedule(Schedule schedule, std::span<const Meeting> meetings, const ScheduleConfig& config);

// Best-improvement relocations and pairwise swaps that keep every day feasible.
Schedule local_search_improve(const Schedule& schedule, std::span<const Meeting> meetings,
                              const ScheduleConfig& config);

struct ScheduleOptions {
  int restarts = 16;
  int kmeans_iterations = 25;
};

// Seeded k-means, capacity repair and local search from `restarts` seeds (seed, seed+1, ...);
// keeps the lowest cost, ties to the lowest seed. Deduplicates and drops unselected meetings first.
// Throws the first hard violation code from check_feasibility, or kInfeasible when no restart
// yields a feasible grouping.
Schedule build_schedule(std::span<const Meeting> meetings, const ScheduleConfig& config, std::uint64_t seed,
                        const ScheduleOptions& options = {});

}  // namespace matchboard
