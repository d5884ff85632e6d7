#include "matchboard/serialization.hpp"

#include <cmath>

#include "matchboard/io.hpp"

namespace matchboard {

using nlohmann::json;

void to_json(json& j, const AttributeBag& bag) {
  json flags = json::array();
  for (FamilyFlag f : bag.flags) flags.push_back(to_string(f));
  j = {{"languages", bag.languages}, {"nationality", bag.nationality}, {"flags", flags}, {"levels", bag.levels}};
}

void from_json(const json& j, AttributeBag& bag) {
  bag = {};
  bag.languages = j.value("languages", std::set<std::string>{});
  bag.nationality = j.value("nationality", std::string{});
  for (const auto& f : j.value("flags", json::array())) {
    auto flag = parse_family_flag(f.get<std::string>());
    if (!flag) throw Error(ErrorCode::kInvalidRequest, "unknown family flag '" + f.get<std::string>() + "'");
    bag.flags.insert(*flag);
  }
  bag.levels = j.value("levels", std::vector<double>{});
}

void to_json(json& j, const CrossRef& ref) {
  j = {{"kind", ref.kind == CrossRef::Kind::kCase ? "case" : "location"}, {"target", ref.target}};
}

void from_json(const json& j, CrossRef& ref) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind != "case" && kind != "location") {
    throw Error(ErrorCode::kInvalidRequest, "cross reference kind must be case or location");
  }
  ref.kind = kind == "case" ? CrossRef::Kind::kCase : CrossRef::Kind::kLocation;
  ref.target = j.at("target").get<std::string>();
}

void to_json(json& j, const Case& c) {
  j = {{"id", c.id},
       {"name", c.display_name},
       {"member_count", c.member_count},
       {"employable_count", c.employable_count},
       {"attributes", c.attributes},
       {"preferences", c.preference_ranks},
       {"refusals", c.refusals},
       {"cross_refs", c.cross_refs}};
}

void from_json(const json& j, Case& c) {
  c = {};
  c.id = j.at("id").get<std::string>();
  c.display_name = j.value("name", std::string{});
  c.member_count = j.value("member_count", 1);
  c.employable_count = j.value("employable_count", 0);
  c.attributes = j.value("attributes", AttributeBag{});
  c.preference_ranks = j.value("preferences", std::vector<std::string>{});
  c.refusals = j.value("refusals", std::set<std::string>{});
  c.cross_refs = j.value("cross_refs", std::vector<CrossRef>{});
}

void to_json(json& j, const Location& location) {
  j = {{"id", location.id},
       {"name", location.display_name},
       {"case_capacity", location.case_capacity},
       {"member_capacity", location.member_capacity},
       {"languages", location.supported_languages},
       {"services", location.services},
       {"desired_levels", location.desired_levels}};
}

void from_json(const json& j, Location& location) {
  location = {};
  location.id = j.at("id").get<std::string>();
  location.display_name = j.value("name", std::string{});
  location.case_capacity = j.at("case_capacity").get<int>();
  location.member_capacity = j.at("member_capacity").get<int>();
  location.supported_languages = j.value("languages", std::set<std::string>{});
  location.services = j.value("services", std::set<std::string>{});
  location.desired_levels = j.value("desired_levels", std::vector<double>{});
}

void to_json(json& j, const Instance& instance) {
  j = {{"mode", to_string(instance.mode)},
       {"attribute_dimension", instance.attribute_dimension},
       {"cases", instance.cases},
       {"locations", instance.locations}};
}

void from_json(const json& j, Instance& instance) {
  instance = {};
  instance.mode = parse_score_mode(j.value("mode", std::string(to_string(ScoreMode::kOutcomePredicted))));
  instance.attribute_dimension = j.value("attribute_dimension", kDefaultAttributeDimension);
  instance.cases = j.at("cases").get<std::vector<Case>>();
  instance.locations = j.at("locations").get<std::vector<Location>>();
}

void to_json(json& j, const ScoreMatrix& matrix) {
  json reasons = json::array();
  for (const auto& list : matrix.reasons) {
    json r = json::array();
    for (IncompatibilityReason reason : list) r.push_back(to_string(reason));
    reasons.push_back(std::move(r));
  }
  json compatible = json::array();
  for (bool b : matrix.compatible) compatible.push_back(b);
  j = {{"num_cases", matrix.num_cases},
       {"num_locations", matrix.num_locations},
       {"scores", matrix.scores},
       {"compatible", compatible},
       {"reasons", reasons}};
}

void from_json(const json& j, ScoreMatrix& matrix) {
  matrix = ScoreMatrix(j.at("num_cases").get<std::size_t>(), j.at("num_locations").get<std::size_t>());
  const std::size_t n = matrix.num_cases * matrix.num_locations;
  auto scores = j.at("scores").get<std::vector<double>>();
  auto compatible = j.at("compatible").get<std::vector<bool>>();
  const json& reasons = j.at("reasons");
  if (scores.size() != n || compatible.size() != n || reasons.size() != n) {
    throw Error(ErrorCode::kInvalidRequest, "score matrix arrays do not match its shape");
  }
  matrix.scores = std::move(scores);
  matrix.compatible = std::move(compatible);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& r : reasons[i]) matrix.reasons[i].push_back(parse_incompatibility_reason(r.get<std::string>()));
  }
}

void to_json(json& j, const Capacity& capacity) {
  j = {{"cases", capacity.cases}, {"members", capacity.members}};
}

void from_json(const json& j, Capacity& capacity) {
  capacity.cases = j.at("cases").get<int>();
  capacity.members = j.at("members").get<int>();
}

void to_json(json& j, const OpenOptions& options) {
  j = {{"session_id", options.session_id},
       {"cross_ref_bonus", options.cross_ref_bonus},
       {"allow_unassigned", options.allow_unassigned},
       {"locks", options.locks},
       {"capacity_overrides", options.capacity_overrides}};
}

void from_json(const json& j, OpenOptions& options) {
  options = {};
  options.session_id = j.value("session_id", std::string{});
  options.cross_ref_bonus = j.value("cross_ref_bonus", 0.0);
  options.allow_unassigned = j.value("allow_unassigned", true);
  options.locks = j.value("locks", std::map<std::string, std::string>{});
  options.capacity_overrides = j.value("capacity_overrides", std::map<std::string, Capacity>{});
}

void to_json(json& j, const BoardEvent& event) {
  j = {{"revision", event.revision},
       {"timestamp", event.timestamp},
       {"kind", to_string(event.kind)},
       {"payload", event.payload},
       {"actor", event.actor}};
}

void from_json(const json& j, BoardEvent& event) {
  event.revision = j.at("revision").get<std::int64_t>();
  event.timestamp = j.at("timestamp").get<std::string>();
  event.kind = parse_event_kind(j.at("kind").get<std::string>());
  event.payload = j.at("payload");
  event.actor = j.at("actor").get<std::string>();
}

void to_json(json& j, const Violation& violation) {
  if (violation.kind == Violation::Kind::kOverCapacity) {
    j = {{"kind", "over_capacity"}, {"location", violation.location}, {"dimension", to_string(violation.dimension)}};
  } else {
    j = {{"kind", "incompatible"}, {"location", violation.location}, {"case_id", violation.case_id}};
  }
}

void from_json(const json& j, Violation& violation) {
  violation = {};
  std::string kind = j.at("kind").get<std::string>();
  violation.location = j.at("location").get<std::string>();
  if (kind == "over_capacity") {
    violation.kind = Violation::Kind::kOverCapacity;
    violation.dimension = parse_capacity_dimension(j.at("dimension").get<std::string>());
  } else if (kind == "incompatible") {
    violation.kind = Violation::Kind::kIncompatible;
    violation.case_id = j.at("case_id").get<std::string>();
  } else {
    throw Error(ErrorCode::kInvalidRequest, "unknown violation kind '" + kind + "'");
  }
}

namespace {

json issues_json(const std::vector<ValidationIssue>& issues) {
  json out = json::array();
  for (const auto& i : issues) out.push_back({{"code", i.code}, {"id", i.id}, {"message", i.message}});
  return out;
}

json reasons_json(const std::vector<IncompatibilityReason>& reasons) {
  json out = json::array();
  for (IncompatibilityReason r : reasons) out.push_back(to_string(r));
  return out;
}

[[noreturn]] void snapshot_error(const std::string& reason) {
  throw Error(ErrorCode::kSnapshotError, "invalid snapshot: " + reason, {{"reason", reason}});
}

}  // namespace

void to_json(json& j, const ValidationReport& report) {
  j = {{"ok", report.ok()}, {"errors", issues_json(report.errors)}, {"warnings", issues_json(report.warnings)}};
}

void to_json(json& j, const WhatIf& whatif) {
  j = {{"pair_score", whatif.pair_score},
       {"projected_total", whatif.projected_total},
       {"compatible", whatif.compatible},
       {"reasons", reasons_json(whatif.reasons)},
       {"would_violate_capacity", whatif.would_violate_capacity}};
}

void to_json(json& j, const CrossReferenceView& view) {
  json cases = json::array();
  for (const auto& c : view.linked_cases) {
    cases.push_back({{"case_id", c.case_id}, {"location", c.location}, {"co_placed", c.co_placed}});
  }
  json locations = json::array();
  for (const auto& l : view.linked_locations) {
    locations.push_back({{"location", l.location}, {"co_placed", l.co_placed}});
  }
  j = {{"linked_cases", cases}, {"linked_locations", locations}};
}

void to_json(json& j, const SubscriptionRow& row) {
  j = {{"location", row.location},
       {"placed_cases", row.placed_cases},
       {"placed_members", row.placed_members},
       {"case_capacity", row.case_capacity},
       {"member_capacity", row.member_capacity},
       {"fill_ratio", row.fill_ratio},
       {"undersubscribed", row.undersubscribed},
       {"full", row.full},
       {"over", row.over}};
}

void to_json(json& j, const Schedule& schedule) {
  j = {{"days", schedule.day_groups},
       {"cost_km", schedule.cost},
       {"feasible", schedule.feasible},
       {"violations", schedule.violations}};
}

void to_json(json& j, const Meeting& meeting) {
  j = {{"client_id", meeting.client_id},
       {"lat", meeting.latitude},
       {"lon", meeting.longitude},
       {"duration_minutes", meeting.duration_minutes},
       {"selected", meeting.selected}};
}

void from_json(const json& j, Meeting& meeting) {
  meeting.client_id = j.at("client_id").get<std::string>();
  meeting.latitude = j.at("lat").get<double>();
  meeting.longitude = j.at("lon").get<double>();
  meeting.duration_minutes = j.at("duration_minutes").get<int>();
  meeting.selected = j.value("selected", true);
}

void to_json(json& j, const HistoryRecord& record) {
  j = {{"attributes", record.attributes},
       {"member_count", record.member_count},
       {"location_id", record.location_id},
       {"employed", record.employed}};
}

void from_json(const json& j, HistoryRecord& record) {
  record.attributes = j.value("attributes", AttributeBag{});
  record.member_count = j.at("member_count").get<int>();
  record.location_id = j.at("location_id").get<std::string>();
  record.employed = j.at("employed").get<int>();
}

void to_json(json& j, const ScheduleConfig& config) {
  j = {{"days", config.days},
       {"min_per_day", config.min_per_day},
       {"max_per_day", config.max_per_day},
       {"max_minutes_per_day", config.max_minutes_per_day}};
}

void from_json(const json& j, ScheduleConfig& config) {
  ScheduleConfig defaults;
  config.days = j.value("days", defaults.days);
  config.min_per_day = j.value("min_per_day", defaults.min_per_day);
  config.max_per_day = j.value("max_per_day", defaults.max_per_day);
  config.max_minutes_per_day = j.value("max_minutes_per_day", defaults.max_minutes_per_day);
}

json model_to_json(const TrainedModel& model) {
  const TrainingMeta& m = model.training_meta;
  return {{"format", kModelFormat},
          {"version", kModelFormatVersion},
          {"schema", model.feature_schema},
          {"weights", model.weights},
          {"intercept", model.intercept},
          {"meta",
           {{"iterations", m.iterations},
            {"final_loss", m.final_loss},
            {"l2_strength", m.l2_strength},
            {"converged", m.converged}}}};
}

TrainedModel model_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kModelFormat) {
      throw Error(ErrorCode::kParseError, "not a model document", {{"reason", "format"}});
    }
    if (j.at("version").get<int>() != kModelFormatVersion) {
      throw Error(ErrorCode::kParseError, "unsupported model version " + j.at("version").dump(),
                  {{"reason", "version"}});
    }
    TrainedModel model;
    model.feature_schema = j.at("schema").get<std::vector<std::string>>();
    model.weights = j.at("weights").get<std::vector<double>>();
    model.intercept = j.at("intercept").get<double>();
    const json& m = j.at("meta");
    model.training_meta = {m.at("iterations").get<int>(), m.at("final_loss").get<double>(),
                           m.at("l2_strength").get<double>(), m.at("converged").get<bool>()};
    if (model.weights.size() != model.feature_schema.size()) {
      throw Error(ErrorCode::kParseError, "model weights do not match its schema", {{"reason", "shape"}});
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed model document: ") + e.what(),
                {{"reason", e.what()}});
  }
}

json assignment_to_json(const Assignment& assignment, const Instance& instance) {
  json rows = json::array();
  for (std::size_t c = 0; c < assignment.placement.size(); ++c) {
    int l = assignment.placement[c];
    rows.push_back({{"case_id", instance.cases[c].id},
                    {"location_id", l == kUnplaced ? std::string(kUnassigned) : instance.locations[l].id}});
  }
  json breaches = json::array();
  for (const auto& b : assignment.lock_breaches) {
    breaches.push_back(
        {{"location", b.location}, {"dimension", to_string(b.dimension)}, {"used", b.used}, {"capacity", b.capacity}});
  }
  return {{"status", to_string(assignment.status)},
          {"objective", assignment.objective},
          {"placement", rows},
          {"lock_breaches", breaches},
          {"stats",
           {{"nodes_explored", assignment.stats.nodes_explored},
            {"root_bound", assignment.stats.best_bound},
            {"elapsed_seconds", assignment.stats.elapsed_seconds}}}};
}

json error_to_json(const Error& error) {
  return {{"code", to_string(error.code())}, {"message", error.what()}, {"details", error.details()}};
}

json board_view(const BoardState& state) {
  const Instance& instance = state.instance();
  const ScoreMatrix& matrix = state.matrix();
  json placement = json::array();
  for (std::size_t c = 0; c < instance.cases.size(); ++c) {
    int l = state.placement[c];
    placement.push_back({{"case_id", instance.cases[c].id},
                         {"location_id", placement_location_id(state, c)},
                         {"pair_score", l == kUnplaced ? 0.0 : matrix.score(c, l)},
                         {"locked", state.request.locks.contains(instance.cases[c].id)}});
  }
  return {{"session_id", state.session_id},
          {"revision", state.revision},
          {"total_score", state.total_score},
          {"placement", placement},
          {"violations", state.violations},
          {"locks", state.request.locks},
          {"capacity_overrides", state.request.capacity_overrides},
          {"cross_ref_bonus", state.request.cross_ref_bonus},
          {"allow_unassigned", state.request.allow_unassigned},
          {"subscription", subscription_report(state.placement, state.request)},
          {"event_log", state.event_log}};
}

std::string snapshot_session(const BoardState& state) {
  json placement = json::array();
  for (std::size_t c = 0; c < state.placement.size(); ++c) placement.push_back(placement_location_id(state, c));
  json doc = {{"format", kSnapshotFormat},
              {"version", kSnapshotFormatVersion},
              {"session_id", state.session_id},
              {"opening", state.opening},
              {"instance", state.instance()},
              {"matrix", state.matrix()},
              {"locks", state.request.locks},
              {"capacity_overrides", state.request.capacity_overrides},
              {"cross_ref_bonus", state.request.cross_ref_bonus},
              {"allow_unassigned", state.request.allow_unassigned},
              {"placement", placement},
              {"total_score", state.total_score},
              {"violations", state.violations},
              {"revision", state.revision},
              {"event_log", state.event_log}};
  return doc.dump(2) + "\n";
}

BoardState restore_session(std::string_view bytes) {
  json doc = json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) snapshot_error("not a JSON object");
  BoardState state;
  try {
    if (doc.at("format").get<std::string>() != kSnapshotFormat) snapshot_error("unknown format");
    if (doc.at("version").get<int>() != kSnapshotFormatVersion) {
      snapshot_error("unsupported version " + doc.at("version").dump());
    }
    auto instance = std::make_shared<const Instance>(doc.at("instance").get<Instance>());
    auto matrix = std::make_shared<const ScoreMatrix>(doc.at("matrix").get<ScoreMatrix>());
    state.session_id = doc.at("session_id").get<std::string>();
    state.opening = doc.at("opening").get<OpenOptions>();
    state.request.instance = instance;
    state.request.matrix = matrix;
    state.request.locks = doc.at("locks").get<std::map<std::string, std::string>>();
    state.request.capacity_overrides = doc.at("capacity_overrides").get<std::map<std::string, Capacity>>();
    state.request.cross_ref_bonus = doc.at("cross_ref_bonus").get<double>();
    state.request.allow_unassigned = doc.at("allow_unassigned").get<bool>();
    state.total_score = doc.at("total_score").get<double>();
    state.violations = doc.at("violations").get<std::vector<Violation>>();
    state.revision = doc.at("revision").get<std::int64_t>();
    state.event_log = doc.at("event_log").get<std::vector<BoardEvent>>();

    if (matrix->num_cases != instance->cases.size() || matrix->num_locations != instance->locations.size()) {
      snapshot_error("score matrix shape does not match the instance");
    }
    PlacementEvaluator eval(state.request);
    const json& placement = doc.at("placement");
    if (placement.size() != instance->cases.size()) snapshot_error("placement length does not match cases");
    for (const auto& id : placement) {
      std::string location = id.get<std::string>();
      state.placement.push_back(location == kUnassigned ? kUnplaced
                                                        : static_cast<int>(eval.index().location_at(location)));
    }
    if (state.event_log.empty() || state.event_log.back().revision != state.revision) {
      snapshot_error("event log does not end at the recorded revision");
    }
    for (std::size_t i = 0; i < state.event_log.size(); ++i) {
      if (state.event_log[i].revision != static_cast<std::int64_t>(i)) snapshot_error("event revisions not contiguous");
    }
    if (compute_violations(state.request, state.placement) != state.violations) {
      snapshot_error("violations inconsistent with placement");
    }
    double recomputed = eval.objective(state.placement);
    if (std::abs(recomputed - state.total_score) > 1e-6 * std::max(1.0, std::abs(recomputed))) {
      snapshot_error("total score inconsistent with placement");
    }
  } catch (const json::exception& e) {
    snapshot_error(e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSnapshotError) throw;
    snapshot_error(std::string(to_string(e.code())) + ": " + e.what());
  }
  return state;
}

ExportFormat parse_export_format(std::string_view text) {
  if (text == "csv") return ExportFormat::kCsv;
  if (text == "json") return ExportFormat::kJson;
  throw Error(ErrorCode::kInvalidRequest, "export format must be csv or json", {{"format", text}});
}

std::string violation_label(const Violation& violation) {
  if (violation.kind == Violation::Kind::kIncompatible) return "incompatible";
  return "over_capacity:" + std::string(to_string(violation.dimension));
}

std::string export_assignment(const BoardState& state, ExportFormat format) {
  const Instance& instance = state.instance();
  const ScoreMatrix& matrix = state.matrix();

  struct Row {
    std::string case_id;
    std::string location_id;
    double pair_score;
    bool locked;
    std::vector<std::string> violations;
  };
  std::vector<Row> rows;
  for (std::size_t c = 0; c < instance.cases.size(); ++c) {
    int l = state.placement[c];
    Row row{instance.cases[c].id, placement_location_id(state, c), l == kUnplaced ? 0.0 : matrix.score(c, l),
            state.request.locks.contains(instance.cases[c].id), {}};
    for (const Violation& v : state.violations) {
      bool mine = v.kind == Violation::Kind::kIncompatible ? v.case_id == row.case_id
                                                           : l != kUnplaced && v.location == row.location_id;
      if (mine) row.violations.push_back(violation_label(v));
    }
    rows.push_back(std::move(row));
  }

  if (format == ExportFormat::kJson) {
    json out = json::array();
    for (const Row& r : rows) {
      out.push_back({{"case_id", r.case_id},
                     {"location_id", r.location_id},
                     {"pair_score", r.pair_score},
                     {"locked", r.locked},
                     {"violations", r.violations}});
    }
    return json{{"rows", out}, {"total_score", state.total_score}}.dump(2) + "\n";
  }
  std::string csv = "case_id,location_id,pair_score,locked,violations\n";
  for (const Row& r : rows) {
    csv += csv_field(r.case_id) + "," + csv_field(r.location_id) + "," + format_double(r.pair_score) + "," +
           (r.locked ? "true" : "false") + "," + csv_field(join_list(r.violations, '|')) + "\n";
  }
  csv += "TOTAL,," + format_double(state.total_score) + ",,\n";
  return csv;
}

std::string format_score_matrix_csv(const Instance& instance, const ScoreMatrix& matrix) {
  std::string csv = "case_id,location_id,score,compatible,reasons\n";
  for (std::size_t c = 0; c < matrix.num_cases; ++c) {
    for (std::size_t l = 0; l < matrix.num_locations; ++l) {
      std::vector<std::string> reasons;
      for (IncompatibilityReason r : matrix.reasons_at(c, l)) reasons.emplace_back(to_string(r));
      csv += csv_field(instance.cases[c].id) + "," + csv_field(instance.locations[l].id) + "," +
             format_double(matrix.score(c, l)) + "," + (matrix.is_compatible(c, l) ? "true" : "false") + "," +
             csv_field(join_list(reasons, '|')) + "\n";
    }
  }
  return csv;
}

}  // namespace matchboard
