#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "matchboard/error.hpp"

namespace matchboard {

// Attribute dimension used by the student/project-center configuration.
inline constexpr std::size_t kDefaultAttributeDimension = 8;

enum class ScoreMode { kOutcomePredicted, kPreferenceAttribute };

std::string_view to_string(ScoreMode mode);
ScoreMode parse_score_mode(std::string_view text);

enum class FamilyFlag { kLargeFamily, kSingleParent };

std::string_view to_string(FamilyFlag flag);
std::optional<FamilyFlag> parse_family_flag(std::string_view text);

struct AttributeBag {
  std::set<std::string> languages;
  std::string nationality;
  std::set<FamilyFlag> flags;
  std::vector<double> levels;

  bool operator==(const AttributeBag&) const = default;
};

struct CrossRef {
  enum class Kind { kCase, kLocation };
  Kind kind = Kind::kCase;
  std::string target;

  bool operator==(const CrossRef&) const = default;
};

struct Case {
  std::string id;
  std::string display_name;
  int member_count = 1;
  int employable_count = 0;
  AttributeBag attributes;
  std::vector<std::string> preference_ranks;  // most preferred first
  std::set<std::string> refusals;
  std::vector<CrossRef> cross_refs;

  bool operator==(const Case&) const = default;
};

struct Location {
  std::string id;
  std::string display_name;
  int case_capacity = 0;    // C
  int member_capacity = 0;  // R
  std::set<std::string> supported_languages;
  std::set<std::string> services;
  std::vector<double> desired_levels;

  bool operator==(const Location&) const = default;
};

struct Instance {
  std::vector<Case> cases;
  std::vector<Location> locations;
  std::size_t attribute_dimension = kDefaultAttributeDimension;
  ScoreMode mode = ScoreMode::kOutcomePredicted;

  bool operator==(const Instance&) const = default;

  // Linear scans; callers on hot paths should build an InstanceIndex.
  std::optional<std::size_t> case_index(std::string_view id) const;
  std::optional<std::size_t> location_index(std::string_view id) const;
};

// Id -> position lookup tables for an instance.
class InstanceIndex {
 public:
  explicit InstanceIndex(const Instance& instance);

  std::optional<std::size_t> find_case(std::string_view id) const;
  std::optional<std::size_t> find_location(std::string_view id) const;
  std::size_t case_at(std::string_view id) const;      // throws kUnknownId
  std::size_t location_at(std::string_view id) const;  // throws kUnknownId

 private:
  std::unordered_map<std::string, std::size_t> cases_;
  std::unordered_map<std::string, std::size_t> locations_;
};

enum class IncompatibilityReason { kLanguageMismatch, kRefused, kUnranked, kServiceMissing };

std::string_view to_string(IncompatibilityReason reason);
IncompatibilityReason parse_incompatibility_reason(std::string_view text);

struct Compatibility {
  bool compatible = true;
  std::vector<IncompatibilityReason> reasons;

  bool operator==(const Compatibility&) const = default;
};

// Dense |cases| x |locations| matrix, row-major by case.
struct ScoreMatrix {
  std::size_t num_cases = 0;
  std::size_t num_locations = 0;
  std::vector<double> scores;
  std::vector<bool> compatible;
  std::vector<std::vector<IncompatibilityReason>> reasons;  // empty for compatible pairs

  ScoreMatrix() = default;
  ScoreMatrix(std::size_t cases, std::size_t locations);

  double score(std::size_t c, std::size_t l) const { return scores[c * num_locations + l]; }
  bool is_compatible(std::size_t c, std::size_t l) const { return compatible[c * num_locations + l]; }
  const std::vector<IncompatibilityReason>& reasons_at(std::size_t c, std::size_t l) const {
    return reasons[c * num_locations + l];
  }

  bool operator==(const ScoreMatrix&) const = default;
};

struct ValidationIssue {
  std::string code;  // e.g. DUPLICATE_ID, DANGLING_REF, EMPTY_INSTANCE
  std::string id;    // offending entity id (or referenced id)
  std::string message;

  bool operator==(const ValidationIssue&) const = default;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::vector<ValidationIssue> warnings;

  bool ok() const { return errors.empty(); }
  bool operator==(const ValidationReport&) const = default;
};

ValidationReport validate_instance(const Instance& instance);

// Throws Error(kValidationFailed) carrying the report when validation fails.
void require_valid(const Instance& instance);

Compatibility compatibility(const Case& c, const Location& location, ScoreMode mode);

}  // namespace matchboard
