#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "matchboard/logistic.hpp"
#include "matchboard/model.hpp"

namespace matchboard {

// Blend between preference-rank utility (alpha) and attribute alignment (1 - alpha).
struct ScoreWeights {
  double alpha = 0.5;

  bool operator==(const ScoreWeights&) const = default;
};

struct TrainingMeta {
  int iterations = 0;
  double final_loss = 0.0;
  double l2_strength = 0.0;
  bool converged = false;

  bool operator==(const TrainingMeta&) const = default;
};

struct TrainedModel {
  std::vector<std::string> feature_schema;
  std::vector<double> weights;
  double intercept = 0.0;
  TrainingMeta training_meta;

  bool operator==(const TrainedModel&) const = default;
};

// One past placement: the case attributes that feed the predictor, where it was placed, and
// whether the case was employed at the 90-day milestone.
struct HistoryRecord {
  AttributeBag attributes;
  int member_count = 1;
  std::string location_id;
  int employed = 0;

  bool operator==(const HistoryRecord&) const = default;
};

struct TrainOptions {
  double l2_strength = 1e-3;
  int max_iter = 5000;
  double tolerance = 1e-6;
};

// Feature names. Location indicators are "location:<id>".
inline constexpr const char* kFeatureLargeFamily = "large_family";
inline constexpr const char* kFeatureSingleParent = "single_parent";
inline constexpr const char* kFeatureLanguageMatch = "language_match";
inline constexpr const char* kFeatureMemberCount = "member_count";
inline constexpr const char* kLocationFeaturePrefix = "location:";
// member_count enters the predictor as member_count / kMemberCountScale.
inline constexpr double kMemberCountScale = 10.0;

std::vector<std::string> employment_feature_schema(std::span<const Location> locations);

// Evaluates `schema` for one (case attributes, location) pair.
// Throws kDomainError for unknown feature names or a location without an indicator column.
std::vector<double> employment_features(const std::vector<std::string>& schema, const AttributeBag& attributes,
                                        int member_count, const Location& location);

double preference_rank_utility(int rank, int list_length);
double attribute_alignment(std::span<const double> levels, std::span<const double> desired);
double goat_score(const Case& c, const Location& location, const ScoreWeights& weights);

TrainedModel train_employment_model(std::span<const HistoryRecord> history, std::span<const Location> locations,
                                    const TrainOptions& options);

double predict_probability(const TrainedModel& model, const Case& c, const Location& location);

using ScoreSource = std::variant<TrainedModel, ScoreWeights>;

// outcome_predicted: employable_count * P(employed); every pair scored, incompatible ones masked.
// preference_attribute: goat_score on compatible pairs, 0 elsewhere.
ScoreMatrix build_score_matrix(const Instance& instance, const ScoreSource& source);

}  // namespace matchboard
