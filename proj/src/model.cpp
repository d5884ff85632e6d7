#include "matchboard/model.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace matchboard {

std::string_view to_string(ScoreMode mode) {
  return mode == ScoreMode::kOutcomePredicted ? "outcome_predicted" : "preference_attribute";
}

ScoreMode parse_score_mode(std::string_view text) {
  if (text == "outcome_predicted") return ScoreMode::kOutcomePredicted;
  if (text == "preference_attribute") return ScoreMode::kPreferenceAttribute;
  throw Error(ErrorCode::kDomainError, "unknown score mode '" + std::string(text) + "'");
}

std::string_view to_string(FamilyFlag flag) {
  return flag == FamilyFlag::kLargeFamily ? "large_family" : "single_parent";
}

std::optional<FamilyFlag> parse_family_flag(std::string_view text) {
  if (text == "large_family") return FamilyFlag::kLargeFamily;
  if (text == "single_parent") return FamilyFlag::kSingleParent;
  return std::nullopt;
}

std::string_view to_string(IncompatibilityReason reason) {
  switch (reason) {
    case IncompatibilityReason::kLanguageMismatch: return "language_mismatch";
    case IncompatibilityReason::kRefused: return "refused";
    case IncompatibilityReason::kUnranked: return "unranked";
    case IncompatibilityReason::kServiceMissing: return "service_missing";
  }
  return "unranked";
}

IncompatibilityReason parse_incompatibility_reason(std::string_view text) {
  if (text == "language_mismatch") return IncompatibilityReason::kLanguageMismatch;
  if (text == "refused") return IncompatibilityReason::kRefused;
  if (text == "unranked") return IncompatibilityReason::kUnranked;
  if (text == "service_missing") return IncompatibilityReason::kServiceMissing;
  throw Error(ErrorCode::kDomainError, "unknown incompatibility reason '" + std::string(text) + "'");
}

std::optional<std::size_t> Instance::case_index(std::string_view id) const {
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (cases[i].id == id) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> Instance::location_index(std::string_view id) const {
  for (std::size_t i = 0; i < locations.size(); ++i) {
    if (locations[i].id == id) return i;
  }
  return std::nullopt;
}

InstanceIndex::InstanceIndex(const Instance& instance) {
  for (std::size_t i = 0; i < instance.cases.size(); ++i) cases_.emplace(instance.cases[i].id, i);
  for (std::size_t i = 0; i < instance.locations.size(); ++i) {
    locations_.emplace(instance.locations[i].id, i);
  }
}

std::optional<std::size_t> InstanceIndex::find_case(std::string_view id) const {
  auto it = cases_.find(std::string(id));
  if (it == cases_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> InstanceIndex::find_location(std::string_view id) const {
  auto it = locations_.find(std::string(id));
  if (it == locations_.end()) return std::nullopt;
  return it->second;
}

std::size_t InstanceIndex::case_at(std::string_view id) const {
  auto found = find_case(id);
  if (!found) {
    throw Error(ErrorCode::kUnknownId, "unknown case id '" + std::string(id) + "'", {{"id", id}});
  }
  return *found;
}

std::size_t InstanceIndex::location_at(std::string_view id) const {
  auto found = find_location(id);
  if (!found) {
    throw Error(ErrorCode::kUnknownId, "unknown location id '" + std::string(id) + "'", {{"id", id}});
  }
  return *found;
}

ScoreMatrix::ScoreMatrix(std::size_t cases, std::size_t locations)
    : num_cases(cases),
      num_locations(locations),
      scores(cases * locations, 0.0),
      compatible(cases * locations, true),
      reasons(cases * locations) {}

namespace {

void check_levels(const std::vector<double>& levels, std::size_t dimension, const std::string& owner,
                  ValidationReport& report) {
  if (levels.size() != dimension) {
    report.errors.push_back({"LEVELS_LENGTH", owner,
                             "expected " + std::to_string(dimension) + " attribute levels, got " +
                                 std::to_string(levels.size())});
    return;
  }
  for (double v : levels) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      report.errors.push_back({"LEVEL_OUT_OF_RANGE", owner, "attribute levels must lie in [0,1]"});
      return;
    }
  }
}

}  // namespace

ValidationReport validate_instance(const Instance& instance) {
  ValidationReport report;
  if (instance.cases.empty() && instance.locations.empty()) {
    report.warnings.push_back({"EMPTY_INSTANCE", "", "instance has no cases and no locations"});
  }

  std::unordered_set<std::string> case_ids;
  std::unordered_set<std::string> location_ids;
  for (const Location& loc : instance.locations) {
    if (loc.id.empty()) report.errors.push_back({"EMPTY_ID", "", "location with empty id"});
    if (!location_ids.insert(loc.id).second) {
      report.errors.push_back({"DUPLICATE_ID", loc.id, "duplicate location id"});
    }
  }
  for (const Case& c : instance.cases) {
    if (c.id.empty()) report.errors.push_back({"EMPTY_ID", "", "case with empty id"});
    if (!case_ids.insert(c.id).second) {
      report.errors.push_back({"DUPLICATE_ID", c.id, "duplicate case id"});
    }
  }

  for (const Location& loc : instance.locations) {
    if (loc.case_capacity < 0 || loc.member_capacity < 0) {
      report.errors.push_back({"NEGATIVE_CAPACITY", loc.id, "capacities must be non-negative"});
    }
    check_levels(loc.desired_levels, instance.attribute_dimension, loc.id, report);
  }

  for (const Case& c : instance.cases) {
    if (c.member_count < 1) {
      report.errors.push_back({"INVALID_MEMBER_COUNT", c.id, "member_count must be at least 1"});
    }
    if (c.employable_count < 0 || c.employable_count > c.member_count) {
      report.errors.push_back(
          {"INVALID_EMPLOYABLE_COUNT", c.id, "employable_count must lie in [0, member_count]"});
    }
    check_levels(c.attributes.levels, instance.attribute_dimension, c.id, report);

    std::unordered_set<std::string> seen;
    for (const std::string& pref : c.preference_ranks) {
      if (!location_ids.contains(pref)) {
        report.errors.push_back({"DANGLING_REF", pref, "case " + c.id + " ranks unknown location"});
      }
      if (!seen.insert(pref).second) {
        report.errors.push_back({"DUPLICATE_PREFERENCE", c.id, "location " + pref + " ranked twice"});
      }
      if (c.refusals.contains(pref)) {
        report.errors.push_back({"PREFERENCE_REFUSED", c.id, "location " + pref + " both ranked and refused"});
      }
    }
    for (const std::string& refused : c.refusals) {
      if (!location_ids.contains(refused)) {
        report.errors.push_back({"DANGLING_REF", refused, "case " + c.id + " refuses unknown location"});
      }
    }
    for (const CrossRef& ref : c.cross_refs) {
      if (ref.kind == CrossRef::Kind::kCase) {
        if (ref.target == c.id) {
          report.errors.push_back({"SELF_REFERENCE", c.id, "case cross-references itself"});
        } else if (!case_ids.contains(ref.target)) {
          report.errors.push_back({"DANGLING_REF", ref.target, "case " + c.id + " links unknown case"});
        }
      } else if (!location_ids.contains(ref.target)) {
        report.errors.push_back({"DANGLING_REF", ref.target, "case " + c.id + " links unknown location"});
      }
    }
  }
  return report;
}

void require_valid(const Instance& instance) {
  ValidationReport report = validate_instance(instance);
  if (report.ok()) return;
  nlohmann::json errors = nlohmann::json::array();
  for (const ValidationIssue& issue : report.errors) {
    errors.push_back({{"code", issue.code}, {"id", issue.id}, {"message", issue.message}});
  }
  const ValidationIssue& first = report.errors.front();
  throw Error(ErrorCode::kValidationFailed,
              "instance validation failed: " + first.code + "(" + first.id + ")", {{"errors", errors}});
}

Compatibility compatibility(const Case& c, const Location& location, ScoreMode mode) {
  Compatibility result;
  if (mode == ScoreMode::kPreferenceAttribute) {
    bool ranked = std::find(c.preference_ranks.begin(), c.preference_ranks.end(), location.id) !=
                  c.preference_ranks.end();
    if (!ranked) result.reasons.push_back(IncompatibilityReason::kUnranked);
  } else {
    bool shared = std::any_of(c.attributes.languages.begin(), c.attributes.languages.end(),
                              [&](const std::string& lang) { return location.supported_languages.contains(lang); });
    if (!shared) result.reasons.push_back(IncompatibilityReason::kLanguageMismatch);
  }
  if (c.refusals.contains(location.id)) result.reasons.push_back(IncompatibilityReason::kRefused);
  result.compatible = result.reasons.empty();
  return result;
}

}  // namespace matchboard
