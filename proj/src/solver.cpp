#include "matchboard/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "min_cost_flow.hpp"

namespace matchboard {

std::string_view to_string(CapacityDimension dimension) {
  return dimension == CapacityDimension::kCases ? "cases" : "members";
}

CapacityDimension parse_capacity_dimension(std::string_view text) {
  if (text == "cases" || text == "C") return CapacityDimension::kCases;
  if (text == "members" || text == "R") return CapacityDimension::kMembers;
  throw Error(ErrorCode::kDomainError, "unknown capacity dimension '" + std::string(text) + "'");
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasibleLocks: return "infeasible_locks";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kStopped: return "stopped";
  }
  return "optimal";
}

bool SolveRequest::operator==(const SolveRequest& other) const {
  auto same = [](const auto& a, const auto& b) { return a == b || (a && b && *a == *b); };
  return same(instance, other.instance) && same(matrix, other.matrix) && locks == other.locks &&
         capacity_overrides == other.capacity_overrides && cross_ref_bonus == other.cross_ref_bonus &&
         allow_unassigned == other.allow_unassigned;
}

// ---------------------------------------------------------------------------
// PlacementEvaluator

PlacementEvaluator::PlacementEvaluator(const SolveRequest& request)
    : instance_(request.instance),
      matrix_(request.matrix),
      index_(request.instance ? *request.instance : Instance{}),
      bonus_(request.cross_ref_bonus),
      allow_unassigned_(request.allow_unassigned) {
  if (!instance_ || !matrix_) throw Error(ErrorCode::kDomainError, "solve request lacks instance or matrix");
  const std::size_t n = instance_->cases.size();
  const std::size_t m = instance_->locations.size();
  if (matrix_->num_cases != n || matrix_->num_locations != m || matrix_->scores.size() != n * m ||
      matrix_->compatible.size() != n * m) {
    throw Error(ErrorCode::kDomainError, "score matrix shape does not match instance");
  }
  if (!std::isfinite(bonus_) || bonus_ < 0.0) {
    throw Error(ErrorCode::kDomainError, "cross-reference bonus must be a non-negative finite number");
  }

  capacity_.reserve(m);
  for (const Location& loc : instance_->locations) capacity_.push_back({loc.case_capacity, loc.member_capacity});
  for (const auto& [id, cap] : request.capacity_overrides) {
    std::size_t l = index_.location_at(id);
    if (cap.cases < 0 || cap.members < 0) {
      throw Error(ErrorCode::kNegativeCapacity, "capacity override for " + id + " is negative", {{"location", id}});
    }
    capacity_[l] = cap;
  }

  locks_.assign(n, kUnplaced);
  for (const auto& [case_id, location_id] : request.locks) {
    locks_[index_.case_at(case_id)] = static_cast<int>(index_.location_at(location_id));
  }

  partners_.resize(n);
  linked_locations_.resize(n);
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t c = 0; c < n; ++c) {
    std::set<std::size_t> locs;
    for (const CrossRef& ref : instance_->cases[c].cross_refs) {
      if (ref.kind == CrossRef::Kind::kCase) {
        std::size_t d = index_.case_at(ref.target);
        if (d != c) pairs.emplace(std::min(c, d), std::max(c, d));
      } else {
        locs.insert(index_.location_at(ref.target));
      }
    }
    linked_locations_[c].assign(locs.begin(), locs.end());
    num_location_links_ += locs.size();
  }
  for (auto [a, b] : pairs) {
    partners_[a].push_back(b);
    partners_[b].push_back(a);
  }
  num_pair_links_ = pairs.size();

  std::vector<std::size_t> by_id(m);
  std::iota(by_id.begin(), by_id.end(), 0);
  std::sort(by_id.begin(), by_id.end(),
            [&](std::size_t a, std::size_t b) { return instance_->locations[a].id < instance_->locations[b].id; });
  location_rank_.assign(m, 0);
  for (std::size_t r = 0; r < m; ++r) location_rank_[by_id[r]] = static_cast<int>(r);

  cases_by_id_.resize(n);
  std::iota(cases_by_id_.begin(), cases_by_id_.end(), 0);
  std::sort(cases_by_id_.begin(), cases_by_id_.end(),
            [&](std::size_t a, std::size_t b) { return instance_->cases[a].id < instance_->cases[b].id; });
}

std::optional<int> PlacementEvaluator::locked_location(std::size_t c) const {
  if (locks_[c] == kUnplaced) return std::nullopt;
  return locks_[c];
}

double PlacementEvaluator::objective(std::span<const int> placement) const {
  std::vector<double> terms;
  terms.reserve(placement.size());
  for (std::size_t c = 0; c < placement.size(); ++c) {
    if (placement[c] != kUnplaced) terms.push_back(pair_score(c, placement[c]));
  }
  if (bonus_ > 0.0) {
    int links = satisfied_links(placement);
    terms.insert(terms.end(), static_cast<std::size_t>(links), bonus_);
  }
  std::sort(terms.begin(), terms.end());
  return std::accumulate(terms.begin(), terms.end(), 0.0);
}

int PlacementEvaluator::satisfied_links(std::span<const int> placement) const {
  int count = 0;
  for (std::size_t c = 0; c < placement.size(); ++c) {
    if (placement[c] == kUnplaced) continue;
    for (std::size_t d : partners_[c]) {
      if (d > c && placement[d] == placement[c]) ++count;
    }
    for (std::size_t l : linked_locations_[c]) {
      if (placement[c] == static_cast<int>(l)) ++count;
    }
  }
  return count;
}

int PlacementEvaluator::link_delta(std::span<const int> placement, std::size_t c, int target) const {
  auto links_at = [&](int where) {
    if (where == kUnplaced) return 0;
    int count = 0;
    for (std::size_t d : partners_[c]) {
      if (placement[d] == where) ++count;
    }
    for (std::size_t l : linked_locations_[c]) {
      if (where == static_cast<int>(l)) ++count;
    }
    return count;
  };
  return links_at(target) - links_at(placement[c]);
}

bool PlacementEvaluator::fits(std::span<const int> placement) const {
  std::vector<Capacity> used(num_locations());
  for (std::size_t c = 0; c < placement.size(); ++c) {
    if (placement[c] == kUnplaced) continue;
    used[placement[c]].cases += 1;
    used[placement[c]].members += instance_->cases[c].member_count;
  }
  for (std::size_t l = 0; l < used.size(); ++l) {
    if (used[l].cases > capacity_[l].cases || used[l].members > capacity_[l].members) return false;
  }
  return true;
}

std::vector<CapacityBreach> PlacementEvaluator::lock_breaches() const {
  std::vector<Capacity> used(num_locations());
  for (std::size_t c = 0; c < locks_.size(); ++c) {
    if (locks_[c] == kUnplaced) continue;
    used[locks_[c]].cases += 1;
    used[locks_[c]].members += instance_->cases[c].member_count;
  }
  std::vector<CapacityBreach> breaches;
  for (std::size_t l = 0; l < used.size(); ++l) {
    const std::string& id = instance_->locations[l].id;
    if (used[l].cases > capacity_[l].cases) {
      breaches.push_back({id, CapacityDimension::kCases, used[l].cases, capacity_[l].cases});
    }
    if (used[l].members > capacity_[l].members) {
      breaches.push_back({id, CapacityDimension::kMembers, used[l].members, capacity_[l].members});
    }
  }
  return breaches;
}

bool PlacementEvaluator::lex_less(std::span<const int> a, std::span<const int> b) const {
  for (std::size_t c : cases_by_id_) {
    int ra = location_rank(a[c]);
    int rb = location_rank(b[c]);
    if (ra != rb) return ra < rb;
  }
  return false;
}

bool PlacementEvaluator::better(double objective_a, std::span<const int> a, double objective_b,
                                std::span<const int> b) const {
  if (objective_a != objective_b) return objective_a > objective_b;
  return lex_less(a, b);
}

// ---------------------------------------------------------------------------
// Shared search helpers

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double tie_tolerance(double incumbent) { return 1e-9 * std::max(1.0, std::abs(incumbent)); }

struct Usage {
  std::vector<int> cases;
  std::vector<int> members;
};

Usage locked_usage(const PlacementEvaluator& eval) {
  Usage used{std::vector<int>(eval.num_locations(), 0), std::vector<int>(eval.num_locations(), 0)};
  for (std::size_t c = 0; c < eval.num_cases(); ++c) {
    if (auto l = eval.locked_location(c)) {
      used.cases[*l] += 1;
      used.members[*l] += eval.instance().cases[c].member_count;
    }
  }
  return used;
}

Placement locked_placement(const PlacementEvaluator& eval) {
  Placement placement(eval.num_cases(), kUnplaced);
  for (std::size_t c = 0; c < eval.num_cases(); ++c) {
    if (auto l = eval.locked_location(c)) placement[c] = *l;
  }
  return placement;
}

// Compatible locations of a free case, best score first, ties by location id.
std::vector<int> ranked_candidates(const PlacementEvaluator& eval, std::size_t c) {
  std::vector<int> candidates;
  for (std::size_t l = 0; l < eval.num_locations(); ++l) {
    if (eval.matrix().is_compatible(c, l)) candidates.push_back(static_cast<int>(l));
  }
  std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    double sa = eval.pair_score(c, a), sb = eval.pair_score(c, b);
    if (sa != sb) return sa > sb;
    return eval.location_rank(a) < eval.location_rank(b);
  });
  return candidates;
}

Assignment infeasible_locks(const PlacementEvaluator& eval, std::vector<CapacityBreach> breaches) {
  Assignment out;
  out.placement = locked_placement(eval);
  out.status = SolveStatus::kInfeasibleLocks;
  out.lock_breaches = std::move(breaches);
  out.objective = eval.objective(out.placement);
  return out;
}

// Greedy fill; returns nullopt when some case cannot be placed and unassignment is not allowed.
std::optional<Placement> greedy_fill(const PlacementEvaluator& eval) {
  Placement placement = locked_placement(eval);
  Usage used = locked_usage(eval);
  std::vector<std::size_t> order;
  std::vector<std::vector<int>> candidates(eval.num_cases());
  std::vector<double> best(eval.num_cases(), 0.0);
  for (std::size_t c = 0; c < eval.num_cases(); ++c) {
    if (eval.locked_location(c)) continue;
    order.push_back(c);
    candidates[c] = ranked_candidates(eval, c);
    if (!candidates[c].empty()) best[c] = eval.pair_score(c, candidates[c].front());
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (best[a] != best[b]) return best[a] > best[b];
    return eval.instance().cases[a].id < eval.instance().cases[b].id;
  });
  for (std::size_t c : order) {
    const int members = eval.instance().cases[c].member_count;
    for (int l : candidates[c]) {
      Capacity cap = eval.effective_capacity(l);
      if (used.cases[l] + 1 <= cap.cases && used.members[l] + members <= cap.members) {
        placement[c] = l;
        used.cases[l] += 1;
        used.members[l] += members;
        break;
      }
    }
    if (placement[c] == kUnplaced && !eval.allow_unassigned()) return std::nullopt;
  }
  return placement;
}

// ---------------------------------------------------------------------------
// Branch-and-bound

class BranchAndBound {
 public:
  BranchAndBound(const PlacementEvaluator& eval, const SolveOptions& options)
      : eval_(eval), options_(options), start_(std::chrono::steady_clock::now()) {}

  Assignment run() {
    Assignment out;
    if (auto breaches = eval_.lock_breaches(); !breaches.empty()) {
      return infeasible_locks(eval_, std::move(breaches));
    }
    setup();

    if (!relax_root()) {
      out.placement = placement_;
      out.status = SolveStatus::kInfeasible;
      out.objective = eval_.objective(placement_);
      out.stats = stats();
      return out;
    }
    if (auto greedy = greedy_fill(eval_)) offer(*greedy);
    if (auto repaired = repair_relaxation()) offer(*repaired);

    root_bound_ = node_bound(0).bound;
    dfs(0);

    out.stats = stats();
    if (!has_incumbent_) {
      out.placement = placement_;
      out.objective = eval_.objective(placement_);
      out.status = stopped_ ? SolveStatus::kStopped : SolveStatus::kInfeasible;
      return out;
    }
    out.placement = incumbent_;
    out.objective = incumbent_objective_;
    out.status = stopped_ ? SolveStatus::kStopped : SolveStatus::kOptimal;
    return out;
  }

 private:
  struct NodeBound {
    double bound = kNegInf;
    double sum_plain = 0.0;     // per-case best, capacity-relaxed
    double sum_priced = 0.0;    // Lagrangian with location prices
    double term_plain = 0.0;    // contribution of the branching case
    double term_priced = 0.0;
  };

  SolveStats stats() const {
    SolveStats s;
    s.nodes_explored = nodes_;
    s.best_bound = root_bound_;
    s.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return s;
  }

  void setup() {
    const std::size_t n = eval_.num_cases();
    const std::size_t m = eval_.num_locations();
    placement_ = locked_placement(eval_);
    decided_.assign(n, false);
    rem_cases_.resize(m);
    rem_members_.resize(m);
    for (std::size_t l = 0; l < m; ++l) {
      rem_cases_[l] = eval_.effective_capacity(l).cases;
      rem_members_[l] = eval_.effective_capacity(l).members;
    }
    open_links_ = static_cast<int>(eval_.num_links());
    partial_ = 0.0;
    members_.resize(n);
    for (std::size_t c = 0; c < n; ++c) members_[c] = eval_.instance().cases[c].member_count;

    // Locked cases are decided up front.
    for (std::size_t c = 0; c < n; ++c) {
      if (auto l = eval_.locked_location(c)) {
        Step step = decide(c, *l);
        (void)step;
      }
    }

    candidates_.assign(n, {});
    std::vector<double> spread(n, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
      if (decided_[c]) continue;
      for (int l : ranked_candidates(eval_, c)) {
        // Statically impossible locations never become feasible deeper in the tree.
        if (rem_cases_[l] >= 1 && rem_members_[l] >= members_[c]) candidates_[c].push_back(l);
      }
      std::vector<double> values;
      for (int l : candidates_[c]) values.push_back(eval_.pair_score(c, l));
      if (eval_.allow_unassigned()) values.push_back(0.0);
      std::sort(values.rbegin(), values.rend());
      if (values.empty()) {
        spread[c] = 0.0;
      } else {
        spread[c] = values.size() > 1 ? values[0] - values[1] : values[0];
      }
      free_.push_back(c);
    }
    std::stable_sort(free_.begin(), free_.end(), [&](std::size_t a, std::size_t b) {
      if (spread[a] != spread[b]) return spread[a] > spread[b];
      return eval_.instance().cases[a].id < eval_.instance().cases[b].id;
    });
    price_.assign(m, 0.0);
  }

  // Count-capacity transportation relaxation solved as a min-cost flow. Produces location prices
  // for the Lagrangian bound and a relaxed placement for the repair heuristic. Returns false when
  // even the relaxation cannot place every case and unassignment is disallowed.
  bool relax_root() {
    const std::size_t m = eval_.num_locations();
    const int num_free = static_cast<int>(free_.size());
    relaxed_.assign(eval_.num_cases(), kUnplaced);
    if (num_free == 0) return true;
    const int source = 0;
    const int sink = 1;
    auto case_node = [&](int i) { return 2 + i; };
    auto location_node = [&](std::size_t l) { return 2 + num_free + static_cast<int>(l); };
    detail::MinCostFlow flow(2 + num_free + static_cast<int>(m));
    std::vector<std::vector<std::pair<int, int>>> arcs(num_free);  // (location, edge)
    for (int i = 0; i < num_free; ++i) {
      std::size_t c = free_[i];
      flow.add_edge(source, case_node(i), 1, 0.0);
      for (int l : candidates_[c]) {
        arcs[i].emplace_back(l, flow.add_edge(case_node(i), location_node(l), 1, -eval_.pair_score(c, l)));
      }
      if (eval_.allow_unassigned()) flow.add_edge(case_node(i), sink, 1, 0.0);
    }
    std::vector<int> to_sink(m);
    std::vector<int> count_cap(m);
    for (std::size_t l = 0; l < m; ++l) {
      count_cap[l] = std::max(0, std::min(rem_cases_[l], rem_members_[l]));
      to_sink[l] = flow.add_edge(location_node(l), sink, count_cap[l], 0.0);
    }
    auto result = flow.run(source, sink, num_free);
    if (result.flow < num_free) return false;

    for (int i = 0; i < num_free; ++i) {
      for (auto [l, edge] : arcs[i]) {
        if (flow.flow_on(edge) > 0) relaxed_[free_[i]] = l;
      }
    }
    for (std::size_t l = 0; l < m; ++l) {
      double price = flow.potential(sink) - flow.potential(location_node(l));
      if (flow.flow_on(to_sink[l]) < count_cap[l] || !(price > 0.0)) price = 0.0;
      price_[l] = price;
    }
    return true;
  }

  // Relaxed placement made member-feasible: keep relaxed locations while they fit, then place
  // the rest greedily.
  std::optional<Placement> repair_relaxation() const {
    Placement placement = locked_placement(eval_);
    Usage used = locked_usage(eval_);
    std::vector<std::size_t> order = free_;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return eval_.pair_score(a, relaxed_[a]) > eval_.pair_score(b, relaxed_[b]);
    });
    auto try_place = [&](std::size_t c, int l) {
      Capacity cap = eval_.effective_capacity(l);
      if (used.cases[l] + 1 > cap.cases || used.members[l] + members_[c] > cap.members) return false;
      placement[c] = l;
      used.cases[l] += 1;
      used.members[l] += members_[c];
      return true;
    };
    std::vector<std::size_t> pending;
    for (std::size_t c : order) {
      if (relaxed_[c] == kUnplaced || !try_place(c, relaxed_[c])) pending.push_back(c);
    }
    for (std::size_t c : pending) {
      if (relaxed_[c] == kUnplaced && eval_.allow_unassigned()) continue;
      for (int l : candidates_[c]) {
        if (try_place(c, l)) break;
      }
      if (placement[c] == kUnplaced && !eval_.allow_unassigned()) return std::nullopt;
    }
    return placement;
  }

  struct Step {
    std::size_t c;
    int location;
    double gain;
    int closed_links;
  };

  Step preview(std::size_t c, int l) const {
    int satisfied = 0;
    int closed = static_cast<int>(eval_.linked_locations(c).size());
    for (std::size_t d : eval_.case_partners(c)) {
      if (!decided_[d]) continue;
      ++closed;
      if (l != kUnplaced && placement_[d] == l) ++satisfied;
    }
    for (std::size_t loc : eval_.linked_locations(c)) {
      if (l == static_cast<int>(loc)) ++satisfied;
    }
    return {c, l, eval_.pair_score(c, l) + eval_.bonus() * satisfied, closed};
  }

  Step decide(std::size_t c, int l) {
    Step step = preview(c, l);
    placement_[c] = l;
    decided_[c] = true;
    partial_ += step.gain;
    open_links_ -= step.closed_links;
    if (l != kUnplaced) {
      rem_cases_[l] -= 1;
      rem_members_[l] -= members_[c];
    }
    return step;
  }

  void undo(const Step& step) {
    placement_[step.c] = kUnplaced;
    decided_[step.c] = false;
    partial_ -= step.gain;
    open_links_ += step.closed_links;
    if (step.location != kUnplaced) {
      rem_cases_[step.location] += 1;
      rem_members_[step.location] += members_[step.c];
    }
  }

  int count_room(std::size_t l) const { return std::max(0, std::min(rem_cases_[l], rem_members_[l])); }

  NodeBound node_bound(std::size_t depth) const {
    NodeBound nb;
    for (std::size_t l = 0; l < price_.size(); ++l) nb.sum_priced += price_[l] * count_room(l);
    const double floor = eval_.allow_unassigned() ? 0.0 : kNegInf;
    for (std::size_t k = depth; k < free_.size(); ++k) {
      std::size_t c = free_[k];
      double plain = floor;
      double priced = floor;
      bool first = true;
      for (int l : candidates_[c]) {
        if (rem_cases_[l] < 1 || rem_members_[l] < members_[c]) continue;
        double s = eval_.pair_score(c, l);
        if (first) {
          plain = std::max(plain, s);
          first = false;
        }
        priced = std::max(priced, s - price_[l]);
      }
      if (plain == kNegInf) return NodeBound{};  // some case can no longer be placed
      nb.sum_plain += plain;
      nb.sum_priced += priced;
      if (k == depth) {
        nb.term_plain = plain;
        nb.term_priced = priced;
      }
    }
    nb.bound = partial_ + std::min(nb.sum_plain, nb.sum_priced) + eval_.bonus() * open_links_;
    return nb;
  }

  bool lex_dominated() const {
    for (std::size_t c : eval_.cases_by_id()) {
      if (!decided_[c]) return false;
      int ra = eval_.location_rank(placement_[c]);
      int rb = eval_.location_rank(incumbent_[c]);
      if (ra != rb) return ra > rb;
    }
    return true;
  }

  bool prune(double bound) const {
    if (bound == kNegInf) return true;
    if (!has_incumbent_) return false;
    double tol = tie_tolerance(incumbent_objective_);
    if (bound < incumbent_objective_ - tol) return true;
    return bound <= incumbent_objective_ + tol && lex_dominated();
  }

  void offer(const Placement& candidate) {
    double value = eval_.objective(candidate);
    if (!has_incumbent_ || eval_.better(value, candidate, incumbent_objective_, incumbent_)) {
      incumbent_ = candidate;
      incumbent_objective_ = value;
      has_incumbent_ = true;
    }
  }

  bool should_stop() {
    if (stopped_) return true;
    if (options_.stop.stop_requested()) stopped_ = true;
    if (options_.time_limit && (nodes_ & 1023) == 0 &&
        std::chrono::steady_clock::now() - start_ > *options_.time_limit) {
      stopped_ = true;
    }
    return stopped_;
  }

  void dfs(std::size_t depth) {
    if (should_stop()) return;
    ++nodes_;
    if (depth == free_.size()) {
      offer(placement_);
      return;
    }
    NodeBound nb = node_bound(depth);
    if (prune(nb.bound)) return;

    const std::size_t c = free_[depth];
    auto branch = [&](int l) {
      Step step = preview(c, l);
      double plain = nb.sum_plain - nb.term_plain;
      double priced = nb.sum_priced - nb.term_priced;
      if (l != kUnplaced) {
        int before = count_room(l);
        int after = std::max(0, std::min(rem_cases_[l] - 1, rem_members_[l] - members_[c]));
        priced -= price_[l] * (before - after);
      }
      double child = partial_ + step.gain + std::min(plain, priced) +
                     eval_.bonus() * (open_links_ - step.closed_links);
      if (has_incumbent_ && child < incumbent_objective_ - tie_tolerance(incumbent_objective_)) return;
      decide(c, l);
      dfs(depth + 1);
      undo(step);
    };
    for (int l : candidates_[c]) {
      if (rem_cases_[l] < 1 || rem_members_[l] < members_[c]) continue;
      branch(l);
      if (stopped_) return;
    }
    if (eval_.allow_unassigned()) branch(kUnplaced);
  }

  const PlacementEvaluator& eval_;
  const SolveOptions& options_;
  std::chrono::steady_clock::time_point start_;

  Placement placement_;
  std::vector<bool> decided_;
  std::vector<int> rem_cases_;
  std::vector<int> rem_members_;
  std::vector<int> members_;
  std::vector<std::size_t> free_;
  std::vector<std::vector<int>> candidates_;
  std::vector<double> price_;
  Placement relaxed_;
  double partial_ = 0.0;
  int open_links_ = 0;

  Placement incumbent_;
  double incumbent_objective_ = 0.0;
  bool has_incumbent_ = false;
  double root_bound_ = 0.0;
  std::int64_t nodes_ = 0;
  bool stopped_ = false;
};

}  // namespace

Assignment solve(const SolveRequest& request, const SolveOptions& options) {
  PlacementEvaluator eval(request);
  return BranchAndBound(eval, options).run();
}

Assignment greedy_warm_start(const SolveRequest& request) {
  PlacementEvaluator eval(request);
  if (auto breaches = eval.lock_breaches(); !breaches.empty()) return infeasible_locks(eval, std::move(breaches));
  Assignment out;
  if (auto placement = greedy_fill(eval)) {
    out.placement = std::move(*placement);
  } else {
    out.placement = locked_placement(eval);
    out.status = SolveStatus::kInfeasible;
  }
  out.objective = eval.objective(out.placement);
  return out;
}

Assignment brute_force_oracle(const SolveRequest& request) {
  PlacementEvaluator eval(request);
  const std::size_t n = eval.num_cases();
  const std::size_t m = eval.num_locations();
  if (n > 8 || m > 4) {
    throw Error(ErrorCode::kDomainError, "brute-force oracle is limited to 8 cases and 4 locations",
                {{"cases", n}, {"locations", m}});
  }
  if (auto breaches = eval.lock_breaches(); !breaches.empty()) return infeasible_locks(eval, std::move(breaches));

  std::vector<std::vector<int>> options(n);
  for (std::size_t c = 0; c < n; ++c) {
    if (auto l = eval.locked_location(c)) {
      options[c] = {*l};
      continue;
    }
    for (std::size_t l = 0; l < m; ++l) {
      if (eval.matrix().is_compatible(c, l)) options[c].push_back(static_cast<int>(l));
    }
    if (eval.allow_unassigned()) options[c].push_back(kUnplaced);
  }

  Placement current(n, kUnplaced);
  Placement best;
  double best_objective = 0.0;
  bool found = false;
  std::int64_t visited = 0;
  auto enumerate = [&](auto&& self, std::size_t c) -> void {
    if (c == n) {
      ++visited;
      if (!eval.fits(current)) return;
      double value = eval.objective(current);
      if (!found || eval.better(value, current, best_objective, best)) {
        best = current;
        best_objective = value;
        found = true;
      }
      return;
    }
    for (int l : options[c]) {
      current[c] = l;
      self(self, c + 1);
    }
    current[c] = kUnplaced;
  };
  enumerate(enumerate, 0);

  Assignment out;
  out.stats.nodes_explored = visited;
  if (!found) {
    out.placement = locked_placement(eval);
    out.objective = eval.objective(out.placement);
    out.status = SolveStatus::kInfeasible;
    return out;
  }
  out.placement = std::move(best);
  out.objective = best_objective;
  out.stats.best_bound = best_objective;
  return out;
}

std::vector<SubscriptionRow> subscription_report(std::span<const int> placement, const SolveRequest& request) {
  PlacementEvaluator eval(request);
  std::vector<SubscriptionRow> rows;
  rows.reserve(eval.num_locations());
  for (std::size_t l = 0; l < eval.num_locations(); ++l) {
    SubscriptionRow row;
    row.location = eval.instance().locations[l].id;
    row.case_capacity = eval.effective_capacity(l).cases;
    row.member_capacity = eval.effective_capacity(l).members;
    rows.push_back(row);
  }
  for (std::size_t c = 0; c < placement.size(); ++c) {
    if (placement[c] == kUnplaced) continue;
    rows[placement[c]].placed_cases += 1;
    rows[placement[c]].placed_members += eval.instance().cases[c].member_count;
  }
  auto ratio = [](int placed, int capacity) {
    return capacity > 0 ? static_cast<double>(placed) / capacity : 1.0;
  };
  for (SubscriptionRow& row : rows) {
    row.fill_ratio = std::max(ratio(row.placed_cases, row.case_capacity),
                              ratio(row.placed_members, row.member_capacity));
    row.full = row.placed_cases >= row.case_capacity || row.placed_members >= row.member_capacity;
    row.over = row.placed_cases > row.case_capacity || row.placed_members > row.member_capacity;
    row.undersubscribed = row.fill_ratio < 0.5;
  }
  return rows;
}

}  // namespace matchboard
