#include "matchboard/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace matchboard {

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
  constexpr double kRad = std::numbers::pi / 180.0;
  double dlat = (lat2 - lat1) * kRad;
  double dlon = (lon2 - lon1) * kRad;
  double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
             std::cos(lat1 * kRad) * std::cos(lat2 * kRad) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

DedupResult deduplicate(std::span<const Meeting> meetings) {
  DedupResult out;
  std::unordered_set<std::string> seen;
  for (const Meeting& m : meetings) {
    if (seen.insert(m.client_id).second) {
      out.unique.push_back(m);
    } else {
      ++out.duplicate_count;
    }
  }
  return out;
}

FeasibilityReport check_feasibility(std::span<const Meeting> meetings, const ScheduleConfig& config) {
  FeasibilityReport report;
  if (config.days < 1 || config.min_per_day < 0 || config.max_per_day < config.min_per_day ||
      config.max_per_day < 1 || config.max_minutes_per_day < 1) {
    report.violations.push_back(ErrorCode::kInvalidConfig);
    return report;
  }
  long long n = 0;
  long long minutes = 0;
  bool too_long = false;
  for (const Meeting& m : meetings) {
    if (!m.selected) continue;
    ++n;
    minutes += m.duration_minutes;
    too_long = too_long || m.duration_minutes > config.max_minutes_per_day;
  }
  report.meeting_count = static_cast<std::size_t>(n);
  if (n > static_cast<long long>(config.days) * config.max_per_day) {
    report.violations.push_back(ErrorCode::kTooManyPerDay);
  }
  if (n > 0 && n < config.min_per_day) report.violations.push_back(ErrorCode::kTooFewMeetings);
  if (n > 0 && report.violations.empty()) {
    bool partition = false;
    for (long long k = 1; k <= config.days && !partition; ++k) {
      partition = k * config.min_per_day <= n && n <= k * config.max_per_day;
    }
    if (!partition) report.violations.push_back(ErrorCode::kCountPartitionImpossible);
  }
  if (too_long) report.violations.push_back(ErrorCode::kMeetingTooLong);
  if (minutes > static_cast<long long>(config.days) * config.max_minutes_per_day) {
    report.violations.push_back(ErrorCode::kTotalMinutesExceeded);
  }
  return report;
}

namespace {

struct Point {
  double lat;
  double lon;
  int minutes;
};

struct Centroid {
  double lat = 0.0;
  double lon = 0.0;
};

Centroid mean_position(std::span<const Point> points, std::span<const int> members) {
  Centroid c;
  if (members.empty()) return c;
  for (int i : members) {
    c.lat += points[i].lat;
    c.lon += points[i].lon;
  }
  c.lat /= static_cast<double>(members.size());
  c.lon /= static_cast<double>(members.size());
  return c;
}

double group_cost(std::span<const Point> points, std::span<const int> members) {
  if (members.size() < 2) return 0.0;
  Centroid c = mean_position(points, members);
  double total = 0.0;
  for (int i : members) total += haversine_km(points[i].lat, points[i].lon, c.lat, c.lon);
  return total;
}

int group_minutes(std::span<const Point> points, std::span<const int> members) {
  int total = 0;
  for (int i : members) total += points[i].minutes;
  return total;
}

using Groups = std::vector<std::vector<int>>;

// Meetings eligible for scheduling (first occurrence, selected), with an id -> index map.
struct Workset {
  std::vector<Meeting> meetings;
  std::vector<Point> points;
  std::unordered_map<std::string, int> index;
};

Workset make_workset(std::span<const Meeting> meetings) {
  Workset ws;
  for (const Meeting& m : deduplicate(meetings).unique) {
    if (!m.selected) continue;
    ws.index.emplace(m.client_id, static_cast<int>(ws.meetings.size()));
    ws.meetings.push_back(m);
    ws.points.push_back({m.latitude, m.longitude, m.duration_minutes});
  }
  return ws;
}

Schedule to_schedule(const Groups& groups, const Workset& ws, const ScheduleConfig& config) {
  Schedule s;
  for (const auto& group : groups) {
    std::vector<int> sorted = group;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::string> ids;
    for (int i : sorted) ids.push_back(ws.meetings[i].client_id);
    s.day_groups.push_back(std::move(ids));
  }
  return evaluate_schedule(std::move(s), ws.meetings, config);
}

Groups to_groups(const Schedule& schedule, const Workset& ws) {
  Groups groups;
  for (const auto& day : schedule.day_groups) {
    std::vector<int> members;
    for (const std::string& id : day) {
      auto it = ws.index.find(id);
      if (it == ws.index.end()) {
        throw Error(ErrorCode::kUnknownId, "schedule references unknown meeting '" + id + "'", {{"id", id}});
      }
      members.push_back(it->second);
    }
    groups.push_back(std::move(members));
  }
  return groups;
}

bool day_ok(std::size_t count, int minutes, const ScheduleConfig& config) {
  if (count == 0) return true;
  return static_cast<int>(count) >= config.min_per_day && static_cast<int>(count) <= config.max_per_day &&
         minutes <= config.max_minutes_per_day;
}

Groups improve(Groups groups, std::span<const Point> points, const ScheduleConfig& config) {
  const std::size_t days = groups.size();
  std::vector<double> cost(days);
  std::vector<int> minutes(days);
  for (std::size_t d = 0; d < days; ++d) {
    cost[d] = group_cost(points, groups[d]);
    minutes[d] = group_minutes(points, groups[d]);
  }
  auto without = [](const std::vector<int>& g, int drop) {
    std::vector<int> out;
    out.reserve(g.size());
    for (int i : g) {
      if (i != drop) out.push_back(i);
    }
    return out;
  };

  for (;;) {
    double best_delta = -1e-9;
    // kind 0 = relocate (a, ia) -> b ; kind 1 = swap (a, ia) <-> (b, ib)
    std::optional<std::tuple<int, std::size_t, std::size_t, std::size_t, std::size_t>> best;
    for (std::size_t a = 0; a < days; ++a) {
      for (std::size_t ia = 0; ia < groups[a].size(); ++ia) {
        const int p = groups[a][ia];
        std::vector<int> a_minus = without(groups[a], p);
        double cost_a_minus = group_cost(points, a_minus);
        for (std::size_t b = 0; b < days; ++b) {
          if (b == a) continue;
          if (day_ok(a_minus.size(), minutes[a] - points[p].minutes, config) &&
              day_ok(groups[b].size() + 1, minutes[b] + points[p].minutes, config)) {
            std::vector<int> b_plus = groups[b];
            b_plus.push_back(p);
            double delta = cost_a_minus + group_cost(points, b_plus) - cost[a] - cost[b];
            if (delta < best_delta) {
              best_delta = delta;
              best = {0, a, ia, b, 0};
            }
          }
          if (b < a) continue;  // each unordered swap once
          for (std::size_t ib = 0; ib < groups[b].size(); ++ib) {
            const int q = groups[b][ib];
            int ma = minutes[a] - points[p].minutes + points[q].minutes;
            int mb = minutes[b] - points[q].minutes + points[p].minutes;
            if (ma > config.max_minutes_per_day || mb > config.max_minutes_per_day) continue;
            std::vector<int> na = a_minus;
            na.push_back(q);
            std::vector<int> nb = without(groups[b], q);
            nb.push_back(p);
            double delta = group_cost(points, na) + group_cost(points, nb) - cost[a] - cost[b];
            if (delta < best_delta) {
              best_delta = delta;
              best = {1, a, ia, b, ib};
            }
          }
        }
      }
    }
    if (!best) break;
    auto [kind, a, ia, b, ib] = *best;
    if (kind == 0) {
      int p = groups[a][ia];
      groups[a].erase(groups[a].begin() + static_cast<std::ptrdiff_t>(ia));
      groups[b].push_back(p);
    } else {
      std::swap(groups[a][ia], groups[b][ib]);
    }
    for (std::size_t d : {a, b}) {
      cost[d] = group_cost(points, groups[d]);
      minutes[d] = group_minutes(points, groups[d]);
    }
  }
  return groups;
}

// k-means++ seeding followed by Lloyd iterations on great-circle distance.
std::vector<Centroid> kmeans(std::span<const Point> points, int k, int iterations, std::mt19937_64& rng) {
  const std::size_t n = points.size();
  std::vector<Centroid> centers;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::size_t first = pick(rng);
  centers.push_back({points[first].lat, points[first].lon});
  std::vector<double> d2(n);
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const Centroid& c : centers) best = std::min(best, haversine_km(points[i].lat, points[i].lon, c.lat, c.lon));
      d2[i] = best * best;
      total += d2[i];
    }
    std::size_t chosen = pick(rng);
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng);
      for (std::size_t i = 0; i < n; ++i) {
        r -= d2[i];
        if (r <= 0.0) {
          chosen = i;
          break;
        }
      }
    }
    centers.push_back({points[chosen].lat, points[chosen].lon});
  }

  std::vector<int> label(n, 0);
  for (int it = 0; it < iterations; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        double d = haversine_km(points[i].lat, points[i].lon, centers[c].lat, centers[c].lon);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (label[i] != best) {
        label[i] = best;
        changed = true;
      }
    }
    for (int c = 0; c < k; ++c) {
      std::vector<int> members;
      for (std::size_t i = 0; i < n; ++i) {
        if (label[i] == c) members.push_back(static_cast<int>(i));
      }
      if (!members.empty()) centers[c] = mean_position(points, members);
    }
    if (!changed && it > 0) break;
  }
  return centers;
}

// Capacity-aware assignment of points to the centroids, then top-up of under-filled days.
std::optional<Groups> repair(std::span<const Point> points, std::vector<Centroid> centers,
                             const ScheduleConfig& config) {
  const int n = static_cast<int>(points.size());
  const int k = static_cast<int>(centers.size());
  // Use as many days as the minimum count allows.
  int used = config.min_per_day > 0 ? std::min(k, n / config.min_per_day) : k;
  used = std::max(used, 1);
  if (static_cast<long long>(used) * config.max_per_day < n) return std::nullopt;

  // Keep the `used` centroids with the largest natural clusters.
  std::vector<int> natural(k, 0);
  for (const Point& p : points) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      double d = haversine_km(p.lat, p.lon, centers[c].lat, centers[c].lon);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    ++natural[best];
  }
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return natural[a] > natural[b]; });
  std::vector<int> active(order.begin(), order.begin() + used);
  std::sort(active.begin(), active.end());

  std::vector<std::vector<double>> dist(n, std::vector<double>(used));
  std::vector<double> regret(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < used; ++d) {
      const Centroid& c = centers[active[d]];
      dist[i][d] = haversine_km(points[i].lat, points[i].lon, c.lat, c.lon);
    }
    std::vector<double> sorted = dist[i];
    std::sort(sorted.begin(), sorted.end());
    regret[i] = sorted.size() > 1 ? sorted[1] - sorted[0] : 0.0;
  }
  std::vector<int> by_regret(n);
  std::iota(by_regret.begin(), by_regret.end(), 0);
  std::stable_sort(by_regret.begin(), by_regret.end(), [&](int a, int b) { return regret[a] > regret[b]; });

  Groups groups(used);
  std::vector<int> minutes(used, 0);
  for (int i : by_regret) {
    int best = -1;
    for (int d = 0; d < used; ++d) {
      if (static_cast<int>(groups[d].size()) >= config.max_per_day) continue;
      if (minutes[d] + points[i].minutes > config.max_minutes_per_day) continue;
      if (best < 0 || dist[i][d] < dist[i][best]) best = d;
    }
    if (best < 0) return std::nullopt;
    groups[best].push_back(i);
    minutes[best] += points[i].minutes;
  }

  for (int guard = 0; guard < n * used + 1; ++guard) {
    int short_day = -1;
    for (int d = 0; d < used; ++d) {
      if (static_cast<int>(groups[d].size()) < config.min_per_day) {
        short_day = d;
        break;
      }
    }
    if (short_day < 0) break;
    Centroid target = groups[short_day].empty() ? centers[active[short_day]] : mean_position(points, groups[short_day]);
    int donor = -1;
    std::size_t donor_slot = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int d = 0; d < used; ++d) {
      if (d == short_day || static_cast<int>(groups[d].size()) <= config.min_per_day) continue;
      for (std::size_t s = 0; s < groups[d].size(); ++s) {
        const Point& p = points[groups[d][s]];
        if (minutes[short_day] + p.minutes > config.max_minutes_per_day) continue;
        double dd = haversine_km(p.lat, p.lon, target.lat, target.lon);
        if (dd < best_d) {
          best_d = dd;
          donor = d;
          donor_slot = s;
        }
      }
    }
    if (donor < 0) return std::nullopt;
    int moved = groups[donor][donor_slot];
    groups[donor].erase(groups[donor].begin() + static_cast<std::ptrdiff_t>(donor_slot));
    minutes[donor] -= points[moved].minutes;
    groups[short_day].push_back(moved);
    minutes[short_day] += points[moved].minutes;
  }
  for (int d = 0; d < used; ++d) {
    if (!day_ok(groups[d].size(), minutes[d], config) || groups[d].empty()) return std::nullopt;
  }

  Groups full(k);
  for (int d = 0; d < used; ++d) full[active[d]] = std::move(groups[d]);
  return full;
}

}  // namespace

double schedule_cost(const Schedule& schedule, std::span<const Meeting> meetings) {
  std::unordered_map<std::string, const Meeting*> by_id;
  for (const Meeting& m : meetings) by_id.emplace(m.client_id, &m);
  double total = 0.0;
  for (const auto& day : schedule.day_groups) {
    std::vector<Point> points;
    for (const std::string& id : day) {
      auto it = by_id.find(id);
      if (it == by_id.end()) {
        throw Error(ErrorCode::kUnknownId, "schedule references unknown meeting '" + id + "'", {{"id", id}});
      }
      points.push_back({it->second->latitude, it->second->longitude, it->second->duration_minutes});
    }
    std::vector<int> members(points.size());
    std::iota(members.begin(), members.end(), 0);
    total += group_cost(points, members);
  }
  return total;
}

Schedule evaluate_schedule(Schedule schedule, std::span<const Meeting> meetings, const ScheduleConfig& config) {
  schedule.cost = schedule_cost(schedule, meetings);
  schedule.violations.clear();
  if (static_cast<int>(schedule.day_groups.size()) > config.days) {
    schedule.violations.push_back("TOO_MANY_DAYS");
  }
  std::unordered_map<std::string, const Meeting*> by_id;
  for (const Meeting& m : meetings) by_id.emplace(m.client_id, &m);
  std::unordered_map<std::string, int> seen;
  for (std::size_t d = 0; d < schedule.day_groups.size(); ++d) {
    const auto& day = schedule.day_groups[d];
    int minutes = 0;
    for (const std::string& id : day) {
      minutes += by_id.at(id)->duration_minutes;
      if (!by_id.at(id)->selected) schedule.violations.push_back("UNSELECTED:" + id);
      if (++seen[id] == 2) schedule.violations.push_back("DUPLICATE:" + id);
    }
    if (day.empty()) continue;
    const std::string label = "day " + std::to_string(d + 1) + ": ";
    if (static_cast<int>(day.size()) < config.min_per_day) {
      schedule.violations.push_back(label + std::string(to_string(ErrorCode::kTooFewMeetings)));
    }
    if (static_cast<int>(day.size()) > config.max_per_day) {
      schedule.violations.push_back(label + std::string(to_string(ErrorCode::kTooManyPerDay)));
    }
    if (minutes > config.max_minutes_per_day) {
      schedule.violations.push_back(label + std::string(to_string(ErrorCode::kTotalMinutesExceeded)));
    }
  }
  for (const Meeting& m : deduplicate(meetings).unique) {
    if (m.selected && !seen.contains(m.client_id)) schedule.violations.push_back("MISSING:" + m.client_id);
  }
  schedule.feasible = schedule.violations.empty();
  return schedule;
}

Schedule local_search_improve(const Schedule& schedule, std::span<const Meeting> meetings,
                              const ScheduleConfig& config) {
  Workset ws = make_workset(meetings);
  Groups groups = to_groups(schedule, ws);
  while (static_cast<int>(groups.size()) < config.days) groups.emplace_back();
  return to_schedule(improve(std::move(groups), ws.points, config), ws, config);
}

Schedule build_schedule(std::span<const Meeting> meetings, const ScheduleConfig& config, std::uint64_t seed,
                        const ScheduleOptions& options) {
  Workset ws = make_workset(meetings);
  FeasibilityReport report = check_feasibility(ws.meetings, config);
  if (!report.ok()) {
    ErrorCode first = report.violations.front();
    nlohmann::json codes = nlohmann::json::array();
    for (ErrorCode code : report.violations) codes.push_back(to_string(code));
    throw Error(first, "schedule is infeasible: " + std::string(to_string(first)), {{"violations", codes}});
  }
  if (ws.points.empty()) return to_schedule(Groups(config.days), ws, config);

  std::optional<Schedule> best;
  for (int r = 0; r < std::max(1, options.restarts); ++r) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(r));
    int k = std::min<int>(config.days, static_cast<int>(ws.points.size()));
    auto centers = kmeans(ws.points, k, options.kmeans_iterations, rng);
    auto groups = repair(ws.points, std::move(centers), config);
    if (!groups) continue;
    while (static_cast<int>(groups->size()) < config.days) groups->emplace_back();
    Schedule candidate = to_schedule(improve(std::move(*groups), ws.points, config), ws, config);
    if (!candidate.feasible) continue;
    if (!best || candidate.cost < best->cost) best = std::move(candidate);
  }
  if (!best) {
    throw Error(ErrorCode::kInfeasible, "no feasible day grouping found after " +
                                            std::to_string(options.restarts) + " restarts");
  }
  return *best;
}

}  // namespace matchboard
