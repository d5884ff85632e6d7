// Acceptance suite: one PASS/FAIL line per primary criterion; exits non-zero on any FAIL.

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "matchboard/board.hpp"
#include "matchboard/io.hpp"
#include "matchboard/logistic.hpp"
#include "matchboard/scheduler.hpp"
#include "matchboard/score.hpp"
#include "matchboard/serialization.hpp"
#include "matchboard/service.hpp"
#include "matchboard/solver.hpp"
#include "oracles.hpp"
#include "random_instances.hpp"

using namespace matchboard;
using namespace matchboard::testing;
using Clock = std::chrono::steady_clock;
using nlohmann::json;

namespace {

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

int g_failures = 0;

void report(const std::string& name, const Outcome& o) {
  std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  if (!o.pass) ++g_failures;
}

Outcome guarded(const std::function<Outcome()>& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return {false, std::string("unexpected ") + std::string(to_string(e.code())) + ": " + e.what()};
  } catch (const std::exception& e) {
    return {false, std::string("unexpected exception: ") + e.what()};
  }
}

// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
  constexpr int kInstances = 200;
  constexpr double kLimitSeconds = 1.0;
  int equal = 0;
  int locked_runs = 0;
  double slowest = 0.0;
  std::mt19937_64 rng(20240601);
  RandomInstanceSpec spec;
  spec.max_cases = 6;
  spec.max_locations = 3;
  spec.max_members = 4;
  for (int i = 0; i < kInstances; ++i) {
    spec.integer_scores = i % 3 == 0;
    SolveRequest request = random_request(rng, spec);
    if (std::uniform_real_distribution<double>(0, 1)(rng) < 0.2) {
      add_random_locks(rng, request, 0.4);
      ++locked_runs;
    }
    auto start = Clock::now();
    Assignment exact = solve(request);
    slowest = std::max(slowest, seconds_since(start));
    Assignment oracle = brute_force_oracle(request);
    bool same = exact.status == oracle.status &&
                (oracle.status != SolveStatus::kOptimal || exact.objective == oracle.objective);
    equal += same;
  }
  std::ostringstream d;
  d << equal << "/" << kInstances << " objectives exactly equal (" << locked_runs << " with locks); slowest solve "
    << slowest << " s (limit " << kLimitSeconds << " s)";
  return {equal == kInstances && slowest < kLimitSeconds, d.str()};
}

// Optimality certificate for unit-size cases without link bonuses: the placement is optimal iff
// the exchange graph over locations (plus an unassigned pool and a free-capacity sink) has no
// positive-gain cycle.
bool no_improving_cycle(const SolveRequest& request, const Placement& placement) {
  const Instance& inst = *request.instance;
  const ScoreMatrix& m = *request.matrix;
  const int L = static_cast<int>(inst.locations.size());
  const int U = L;      // unassigned pool
  const int F = L + 1;  // free capacity
  const int N = L + 2;
  const double none = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> gain(N, std::vector<double>(N, none));
  std::vector<int> used(L, 0);
  for (std::size_t c = 0; c < placement.size(); ++c) {
    if (placement[c] != kUnplaced) ++used[placement[c]];
  }
  for (std::size_t c = 0; c < placement.size(); ++c) {
    int from = placement[c] == kUnplaced ? U : placement[c];
    double current = placement[c] == kUnplaced ? 0.0 : m.score(c, placement[c]);
    for (int to = 0; to < L; ++to) {
      if (to == from || !m.is_compatible(c, to)) continue;
      gain[from][to] = std::max(gain[from][to], m.score(c, to) - current);
    }
    if (from != U && request.allow_unassigned) gain[from][U] = std::max(gain[from][U], -current);
  }
  for (int l = 0; l < L; ++l) {
    if (used[l] < inst.locations[l].case_capacity) gain[l][F] = 0.0;
  }
  gain[U][F] = 0.0;
  for (int x = 0; x < N - 1; ++x) gain[F][x] = 0.0;
  // Bellman-Ford on negated gains: a negative cycle is an improving exchange.
  std::vector<double> dist(N, 0.0);
  for (int round = 0; round < N; ++round) {
    bool relaxed = false;
    for (int a = 0; a < N; ++a) {
      for (int b = 0; b < N; ++b) {
        if (gain[a][b] == none) continue;
        if (dist[a] - gain[a][b] < dist[b] - 1e-9) {
          dist[b] = dist[a] - gain[a][b];
          relaxed = true;
        }
      }
    }
    if (!relaxed) return true;
  }
  return false;
}

Outcome goat_full_placement() {
  constexpr int kInstances = 50;
  constexpr double kLimitSeconds = 30.0;
  int full = 0;
  int certified = 0;
  double slowest = 0.0;
  long long placed_total = 0;
  for (int i = 0; i < kInstances; ++i) {
    GoatInstance g = planted_goat_instance(7000 + i);
    auto start = Clock::now();
    auto matrix = std::make_shared<const ScoreMatrix>(build_score_matrix(*g.instance, ScoreWeights{0.5}));
    SolveRequest request{g.instance, matrix, {}, {}, 0.0, true};
    Assignment a = solve(request);
    slowest = std::max(slowest, seconds_since(start));
    int ranked = 0;
    for (std::size_t c = 0; c < a.placement.size(); ++c) {
      int l = a.placement[c];
      if (l == kUnplaced) continue;
      const auto& prefs = g.instance->cases[c].preference_ranks;
      ranked += std::find(prefs.begin(), prefs.end(), g.instance->locations[l].id) != prefs.end();
    }
    placed_total += ranked;
    full += ranked == static_cast<int>(g.instance->cases.size());
    certified += a.status == SolveStatus::kOptimal && no_improving_cycle(request, a.placement);
  }
  std::ostringstream d;
  d << full << "/" << kInstances << " instances place 100% of 1000 students at a ranked center (" << placed_total
    << "/" << 1000LL * kInstances << " overall); " << certified << "/" << kInstances
    << " optimal with no improving exchange cycle; slowest " << slowest << " s (limit " << kLimitSeconds << " s)";
  return {full == kInstances && certified == kInstances && slowest < kLimitSeconds, d.str()};
}

Outcome lock_semantics() {
  std::mt19937_64 rng(31337);
  int kept = 0;
  int optimal = 0;
  int trials = 0;
  RandomInstanceSpec spec;
  spec.incompatible_rate = 0.4;
  while (trials < 100) {
    BoardState s = random_board(rng, spec);
    // pick an incompatible pair
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t c = 0; c < s.instance().cases.size(); ++c) {
      for (std::size_t l = 0; l < s.instance().locations.size(); ++l) {
        if (!s.matrix().is_compatible(c, l)) pairs.emplace_back(c, l);
      }
    }
    if (pairs.empty()) continue;
    auto [c, l] = pairs[rng() % pairs.size()];
    const std::string case_id = s.instance().cases[c].id;
    const std::string loc_id = s.instance().locations[l].id;
    try {
      s = apply_move(s, case_id, loc_id, {"accept", "2026-01-01T00:00:00.000Z"});
      s = toggle_lock(s, case_id, {"accept", "2026-01-01T00:00:00.000Z"});
      s = reoptimize(s, {"accept", "2026-01-01T00:00:00.000Z"});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInfeasibleLocks) throw;
      // the lock alone overflows the location; that case is covered below
      continue;
    }
    ++trials;
    kept += placement_location_id(s, c) == loc_id;
    Assignment oracle = brute_force_oracle(s.request);
    optimal += oracle.status == SolveStatus::kOptimal && s.total_score == oracle.objective;
  }

  // Capacity-violating lock sets.
  int infeasible_named = 0;
  int lock_sets = 0;
  while (lock_sets < 100) {
    SolveRequest request = random_request(rng);
    add_random_locks(rng, request, 0.7);
    PlacementEvaluator eval(request);
    std::vector<Capacity> load(eval.num_locations());
    for (const auto& [cid, lid] : request.locks) {
      std::size_t li = eval.index().location_at(lid);
      load[li].cases += 1;
      load[li].members += request.instance->cases[eval.index().case_at(cid)].member_count;
    }
    std::vector<std::string> expected;
    for (std::size_t li = 0; li < load.size(); ++li) {
      Capacity cap = eval.effective_capacity(li);
      if (load[li].cases > cap.cases || load[li].members > cap.members) expected.push_back(request.instance->locations[li].id);
    }
    if (expected.empty()) continue;
    ++lock_sets;
    Assignment a = solve(request);
    std::vector<std::string> named;
    for (const auto& b : a.lock_breaches) {
      if (named.empty() || named.back() != b.location) named.push_back(b.location);
    }
    std::sort(named.begin(), named.end());
    std::sort(expected.begin(), expected.end());
    bool solver_ok = a.status == SolveStatus::kInfeasibleLocks && named == expected;
    bool board_ok = false;
    try {
      OpenOptions options;
      options.locks = request.locks;
      open_session(request.instance, request.matrix, options);
    } catch (const Error& e) {
      std::vector<std::string> reported = e.details().value("locations", std::vector<std::string>{});
      std::sort(reported.begin(), reported.end());
      board_ok = e.code() == ErrorCode::kInfeasibleLocks && reported == expected;
    }
    infeasible_named += solver_ok && board_ok;
  }
  std::ostringstream d;
  d << kept << "/" << trials << " locked incompatible pairs retained after reoptimize, " << optimal << "/" << trials
    << " equal to the brute-force optimum under the lock; " << infeasible_named << "/" << lock_sets
    << " capacity-violating lock sets return INFEASIBLE_LOCKS naming exactly the violating locations";
  return {kept == trials && optimal == trials && infeasible_named == lock_sets, d.str()};
}

Outcome whatif_parity() {
  std::mt19937_64 rng(4242);
  constexpr double kTolerance = 1e-9;
  double worst_vs_apply = 0.0;
  double worst_vs_recompute = 0.0;
  long long pairs = 0;
  int replay_equal = 0;
  const EventContext ctx{"accept", "2026-01-01T00:00:00.000Z"};
  for (int b = 0; b < 100; ++b) {
    BoardState s = random_board(rng);
    // scramble so boards are not only at the optimum
    for (int k = 0; k < 3; ++k) {
      const Instance& inst = s.instance();
      try {
        s = apply_move(s, inst.cases[rng() % inst.cases.size()].id, inst.locations[rng() % inst.locations.size()].id, ctx);
      } catch (const Error&) {
      }
    }
    for (const Case& c : s.instance().cases) {
      if (s.request.locks.contains(c.id)) continue;
      std::vector<std::string> targets = {std::string(kUnassigned)};
      for (const Location& l : s.instance().locations) targets.push_back(l.id);
      for (const std::string& t : targets) {
        WhatIf w = whatif_score(s, c.id, t);
        BoardState moved = apply_move(s, c.id, t, ctx);
        worst_vs_apply = std::max(worst_vs_apply, std::abs(w.projected_total - moved.total_score));
        worst_vs_recompute = std::max(worst_vs_recompute, std::abs(w.projected_total - recompute_total(moved)));
        ++pairs;
      }
    }
    // random mutation sequence, then replay
    for (int k = 0; k < 10; ++k) {
      const Instance& inst = s.instance();
      std::string cid = inst.cases[rng() % inst.cases.size()].id;
      std::string lid = inst.locations[rng() % inst.locations.size()].id;
      try {
        switch (rng() % 5) {
          case 0:
          case 1:
            s = apply_move(s, cid, lid, ctx);
            break;
          case 2:
            s = toggle_lock(s, cid, ctx);
            break;
          case 3:
            s = adjust_capacity(s, lid, rng() % 2 ? CapacityDimension::kCases : CapacityDimension::kMembers, 1, ctx);
            break;
          default:
            s = reoptimize(s, ctx);
        }
      } catch (const Error&) {
      }
    }
    replay_equal += replay(s) == s;
  }
  std::ostringstream d;
  d << pairs << " (case, target) pairs on 100 boards: max |whatif - applied total| " << worst_vs_apply
    << ", max |whatif - recomputed total| " << worst_vs_recompute << " (tolerance " << kTolerance << "); "
    << replay_equal << "/100 logs replay to identical state";
  return {worst_vs_apply <= kTolerance && worst_vs_recompute <= kTolerance && replay_equal == 100, d.str()};
}

// Uniformly shuffled meetings cut into a random feasible day-size composition.
Schedule random_feasible_partition(std::mt19937_64& rng, std::span<const Meeting> meetings, const ScheduleConfig& config) {
  const int n = static_cast<int>(meetings.size());
  const int per_day_cap = std::min(config.max_per_day, config.max_minutes_per_day / meetings.front().duration_minutes);
  std::vector<int> day_counts;
  for (int k = 1; k <= config.days; ++k) {
    if (k * config.min_per_day <= n && n <= k * per_day_cap) day_counts.push_back(k);
  }
  const int k = day_counts[rng() % day_counts.size()];
  std::vector<int> sizes(k, config.min_per_day);
  for (int extra = n - k * config.min_per_day; extra > 0;) {
    int d = static_cast<int>(rng() % k);
    if (sizes[d] < per_day_cap) {
      ++sizes[d];
      --extra;
    }
  }
  std::vector<std::string> ids;
  for (const Meeting& m : meetings) ids.push_back(m.client_id);
  std::shuffle(ids.begin(), ids.end(), rng);
  Schedule s;
  s.day_groups.assign(config.days, {});
  std::size_t next = 0;
  for (int d = 0; d < k; ++d) {
    for (int j = 0; j < sizes[d]; ++j) s.day_groups[d].push_back(ids[next++]);
  }
  return evaluate_schedule(s, meetings, config);
}

Outcome scheduler() {
  const ScheduleConfig figure{5, 3, 9, 360};
  std::mt19937_64 rng(515);
  auto meetings = random_meetings(rng, 15, 60);
  Schedule s = build_schedule(meetings, figure, kDefaultScheduleSeed);
  bool three_each = s.feasible && s.day_groups.size() == 5 &&
                    std::all_of(s.day_groups.begin(), s.day_groups.end(), [](const auto& d) { return d.size() == 3; });

  std::vector<double> costs;
  while (costs.size() < 1000) {
    Schedule p = random_feasible_partition(rng, meetings, figure);
    if (p.feasible) costs.push_back(p.cost);
  }
  std::nth_element(costs.begin(), costs.begin() + 500, costs.end());
  double upper = costs[500];
  std::nth_element(costs.begin(), costs.begin() + 499, costs.begin() + 500);
  double median = 0.5 * (costs[499] + upper);

  int matches = 0;
  int trials = 0;
  std::mt19937_64 small_rng(808);
  for (int t = 0; t < 100; ++t) {
    std::size_t n = 6 + small_rng() % 3;
    auto small = random_meetings(small_rng, n, 60);
    const ScheduleConfig two_days{2, 3, 9, 360};
    double optimum = exhaustive_schedule_cost(small, two_days);
    Schedule got = build_schedule(small, two_days, 1000 + t);
    ++trials;
    matches += got.feasible && got.cost <= optimum + 1e-9 * std::max(1.0, optimum);
  }
  std::ostringstream d;
  d << "15 meetings over 5 days: " << (three_each ? "feasible, 3 per day" : "NOT 3 per day") << ", cost " << s.cost
    << " km vs median of 1000 random feasible partitions " << median << " km; exhaustive optimum matched in "
    << matches << "/" << trials << " small trials (need >= 95)";
  return {three_each && s.cost <= median && matches >= 95, d.str()};
}

Outcome predictor() {
  const std::vector<double> truth = {1.2, -0.8, 0.5, 0.0, -1.5, 0.9};
  const double intercept = -0.3;
  SyntheticLogistic data = synthetic_logistic(99, 2000, truth, intercept);
  LogisticFit fit = fit_logistic(data.features, data.labels, LogisticOptions{});
  double linf = std::abs(fit.intercept - intercept);
  for (std::size_t j = 0; j < truth.size(); ++j) linf = std::max(linf, std::abs(fit.weights[j] - truth[j]));

  LogisticObjective objective(data.features, data.labels, 1e-3);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst_fd = 0.0;
  for (int p = 0; p < 10; ++p) {
    std::vector<double> params(objective.num_params());
    for (double& v : params) v = normal(rng);
    std::vector<double> grad(params.size());
    objective.loss_and_gradient(params, grad);
    worst_fd = std::max(worst_fd, relative_error(grad, finite_difference_gradient(objective, params)));
  }
  bool monotone = true;
  for (std::size_t i = 1; i < fit.loss_trace.size(); ++i) monotone &= fit.loss_trace[i] <= fit.loss_trace[i - 1];

  std::ostringstream d;
  d << "weight L-inf error " << linf << " (limit 0.15, " << fit.iterations << " iterations, "
    << (fit.converged ? "converged" : "not converged") << "); worst finite-difference relative error " << worst_fd
    << " over 10 points (limit 1e-4); loss trace " << (monotone ? "monotone" : "NOT monotone") << " over "
    << fit.loss_trace.size() << " entries";
  return {linf <= 0.15 && worst_fd < 1e-4 && monotone, d.str()};
}

Outcome api_parity(const std::filesystem::path& fixtures) {
  Service service(ServiceOptions{fixtures, std::chrono::milliseconds(2000)});
  int port = service.start();
  httplib::Client client("127.0.0.1", port);
  auto headers = [](std::int64_t r) { return httplib::Headers{{kRevisionHeader, std::to_string(r)}}; };
  auto post = [&](const std::string& path, std::int64_t rev, const json& body) {
    auto res = client.Post(path, headers(rev), body.dump(), "application/json");
    if (!res) throw Error(ErrorCode::kIoError, "no response from " + path);
    return res;
  };

  // Over the wire.
  auto created = client.Post("/sessions", json{{"manifest", "goat/manifest.json"}, {"alpha", 0.5},
                                               {"options", {{"session_id", "parity"}, {"cross_ref_bonus", 0.2}}}}
                                              .dump(),
                             "application/json");
  if (!created || created->status != 201) return {false, "session creation failed"};
  const std::string base = "/sessions/parity";
  std::vector<int> statuses;
  statuses.push_back(post(base + "/move", 0, {{"case", "s00"}, {"target", "UNASSIGNED"}})->status);
  statuses.push_back(post(base + "/lock", 1, {{"case", "s02"}})->status);
  statuses.push_back(post(base + "/capacity", 2, {{"location", "london"}, {"dimension", "cases"}, {"delta", 1}})->status);
  statuses.push_back(post(base + "/reoptimize", 3, json::object())->status);
  auto stale = post(base + "/move", 2, {{"case", "s01"}, {"target", "UNASSIGNED"}});
  auto wire_csv = client.Get(base + "/export?format=csv");
  auto wire_json = client.Get(base + "/export?format=json");
  service.stop();

  // In process.
  auto instance = std::make_shared<const Instance>(load_instance(fixtures / "goat" / "manifest.json"));
  auto matrix = std::make_shared<const ScoreMatrix>(build_score_matrix(*instance, ScoreWeights{0.5}));
  OpenOptions options;
  options.session_id = "parity";
  options.cross_ref_bonus = 0.2;
  BoardState s = open_session(instance, matrix, options);
  s = apply_move(s, "s00", "UNASSIGNED");
  s = toggle_lock(s, "s02");
  s = adjust_capacity(s, "london", CapacityDimension::kCases, 1);
  s = reoptimize(s);

  bool all_ok = std::all_of(statuses.begin(), statuses.end(), [](int st) { return st == 200; });
  bool csv_equal = wire_csv && wire_csv->body == export_assignment(s, ExportFormat::kCsv);
  bool json_equal = wire_json && wire_json->body == export_assignment(s, ExportFormat::kJson);
  json stale_body = json::parse(stale->body, nullptr, false);
  bool conflict = stale->status == 409 && !stale_body.is_discarded() && stale_body.value("code", "") == "CONFLICT" &&
                  stale_body.at("details").value("current_revision", -1) == 4;
  std::ostringstream d;
  d << "create/move/lock/capacity/reoptimize " << (all_ok ? "all 2xx" : "had failures") << "; csv export "
    << (csv_equal ? "byte-identical" : "DIFFERS") << ", json export " << (json_equal ? "byte-identical" : "DIFFERS")
    << "; stale-revision move returned " << stale->status << (conflict ? " CONFLICT with current_revision 4" : "");
  return {all_ok && csv_equal && json_equal && conflict, d.str()};
}

}  // namespace

int main() {
  const std::filesystem::path fixtures = MATCHBOARD_FIXTURES;
  report("oracle-equivalence", guarded(oracle_equivalence));
  report("goat-full-placement", guarded(goat_full_placement));
  report("lock-semantics", guarded(lock_semantics));
  report("whatif-apply-parity", guarded(whatif_parity));
  report("scheduler", guarded(scheduler));
  report("predictor", guarded(predictor));
  report("api-parity", guarded([&] { return api_parity(fixtures); }));
  std::cout << (g_failures == 0 ? "ALL PRIMARY CRITERIA PASS" : std::to_string(g_failures) + " CRITERIA FAILED")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
