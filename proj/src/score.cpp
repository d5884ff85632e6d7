#include "matchboard/score.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace matchboard {

std::vector<std::string> employment_feature_schema(std::span<const Location> locations) {
  std::vector<std::string> schema = {kFeatureLargeFamily, kFeatureSingleParent, kFeatureLanguageMatch,
                                     kFeatureMemberCount};
  for (const Location& loc : locations) schema.push_back(kLocationFeaturePrefix + loc.id);
  return schema;
}

std::vector<double> employment_features(const std::vector<std::string>& schema, const AttributeBag& attributes,
                                        int member_count, const Location& location) {
  const std::string own_indicator = kLocationFeaturePrefix + location.id;
  std::vector<double> features;
  features.reserve(schema.size());
  bool location_column = false;
  for (const std::string& name : schema) {
    if (name == kFeatureLargeFamily) {
      features.push_back(attributes.flags.contains(FamilyFlag::kLargeFamily) ? 1.0 : 0.0);
    } else if (name == kFeatureSingleParent) {
      features.push_back(attributes.flags.contains(FamilyFlag::kSingleParent) ? 1.0 : 0.0);
    } else if (name == kFeatureLanguageMatch) {
      bool match = std::any_of(attributes.languages.begin(), attributes.languages.end(),
                               [&](const std::string& l) { return location.supported_languages.contains(l); });
      features.push_back(match ? 1.0 : 0.0);
    } else if (name == kFeatureMemberCount) {
      features.push_back(member_count / kMemberCountScale);
    } else if (name.starts_with(kLocationFeaturePrefix)) {
      bool mine = name == own_indicator;
      location_column = location_column || mine;
      features.push_back(mine ? 1.0 : 0.0);
    } else {
      throw Error(ErrorCode::kDomainError, "unknown feature '" + name + "' in model schema");
    }
  }
  if (!location_column) {
    throw Error(ErrorCode::kDomainError, "model schema has no indicator for location '" + location.id + "'",
                {{"location", location.id}});
  }
  return features;
}

double preference_rank_utility(int rank, int list_length) {
  if (list_length < 1 || rank < 1 || rank > list_length) {
    throw Error(ErrorCode::kDomainError, "rank " + std::to_string(rank) + " outside 1.." +
                                             std::to_string(list_length));
  }
  return static_cast<double>(list_length - rank + 1) / static_cast<double>(list_length);
}

double attribute_alignment(std::span<const double> levels, std::span<const double> desired) {
  if (levels.size() != desired.size()) {
    throw Error(ErrorCode::kDomainError, "attribute vectors differ in length");
  }
  double dot = std::inner_product(levels.begin(), levels.end(), desired.begin(), 0.0);
  double a = std::inner_product(levels.begin(), levels.end(), levels.begin(), 0.0);
  double b = std::inner_product(desired.begin(), desired.end(), desired.begin(), 0.0);
  if (a == 0.0 || b == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(a) * std::sqrt(b)), 0.0, 1.0);
}

double goat_score(const Case& c, const Location& location, const ScoreWeights& weights) {
  if (!(weights.alpha >= 0.0 && weights.alpha <= 1.0)) {
    throw Error(ErrorCode::kDomainError, "alpha must lie in [0,1]");
  }
  if (!compatibility(c, location, ScoreMode::kPreferenceAttribute).compatible) {
    throw Error(ErrorCode::kDomainError, "case " + c.id + " is not eligible for " + location.id,
                {{"case", c.id}, {"location", location.id}});
  }
  auto it = std::find(c.preference_ranks.begin(), c.preference_ranks.end(), location.id);
  int rank = static_cast<int>(it - c.preference_ranks.begin()) + 1;
  double utility = preference_rank_utility(rank, static_cast<int>(c.preference_ranks.size()));
  double alignment = attribute_alignment(c.attributes.levels, location.desired_levels);
  return weights.alpha * utility + (1.0 - weights.alpha) * alignment;
}

TrainedModel train_employment_model(std::span<const HistoryRecord> history, std::span<const Location> locations,
                                    const TrainOptions& options) {
  if (history.empty()) {
    throw Error(ErrorCode::kDegenerateLabels, "training history is empty", {{"records", 0}});
  }
  std::vector<std::string> schema = employment_feature_schema(locations);
  FeatureMatrix x{history.size(), schema.size(), {}};
  x.values.reserve(x.rows * x.cols);
  std::vector<int> y;
  y.reserve(history.size());
  for (const HistoryRecord& record : history) {
    auto loc = std::find_if(locations.begin(), locations.end(),
                            [&](const Location& l) { return l.id == record.location_id; });
    if (loc == locations.end()) {
      throw Error(ErrorCode::kUnknownId, "history references unknown location '" + record.location_id + "'",
                  {{"id", record.location_id}});
    }
    auto row = employment_features(schema, record.attributes, record.member_count, *loc);
    x.values.insert(x.values.end(), row.begin(), row.end());
    y.push_back(record.employed);
  }

  LogisticFit fit = fit_logistic(x, y, {options.l2_strength, options.max_iter, options.tolerance});
  TrainedModel model;
  model.feature_schema = std::move(schema);
  model.weights = std::move(fit.weights);
  model.intercept = fit.intercept;
  model.training_meta = {fit.iterations, fit.final_loss, options.l2_strength, fit.converged};
  return model;
}

double predict_probability(const TrainedModel& model, const Case& c, const Location& location) {
  if (model.weights.size() != model.feature_schema.size()) {
    throw Error(ErrorCode::kDomainError, "model weights do not match its feature schema");
  }
  auto features = employment_features(model.feature_schema, c.attributes, c.member_count, location);
  double z = model.intercept + std::inner_product(features.begin(), features.end(), model.weights.begin(), 0.0);
  return sigmoid(z);
}

ScoreMatrix build_score_matrix(const Instance& instance, const ScoreSource& source) {
  const bool outcome = instance.mode == ScoreMode::kOutcomePredicted;
  if (outcome != std::holds_alternative<TrainedModel>(source)) {
    throw Error(ErrorCode::kDomainError, std::string("score source does not match instance mode ") +
                                             std::string(to_string(instance.mode)));
  }
  ScoreMatrix matrix(instance.cases.size(), instance.locations.size());
  for (std::size_t c = 0; c < instance.cases.size(); ++c) {
    const Case& kase = instance.cases[c];
    for (std::size_t l = 0; l < instance.locations.size(); ++l) {
      const Location& loc = instance.locations[l];
      const std::size_t k = c * matrix.num_locations + l;
      Compatibility compat = compatibility(kase, loc, instance.mode);
      matrix.compatible[k] = compat.compatible;
      matrix.reasons[k] = std::move(compat.reasons);
      if (outcome) {
        matrix.scores[k] = kase.employable_count * predict_probability(std::get<TrainedModel>(source), kase, loc);
      } else if (matrix.compatible[k]) {
        matrix.scores[k] = goat_score(kase, loc, std::get<ScoreWeights>(source));
      }
    }
  }
  return matrix;
}

}  // namespace matchboard
