#include "matchboard/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "matchboard/error.hpp"

namespace matchboard {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double norm2(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

}  // namespace

LogisticObjective::LogisticObjective(const FeatureMatrix& features, std::span<const int> labels,
                                     double l2_strength)
    : features_(features), labels_(labels), l2_(l2_strength) {}

double LogisticObjective::loss(std::span<const double> params) const {
  const std::size_t d = features_.cols;
  double total = 0.0;
  for (std::size_t r = 0; r < features_.rows; ++r) {
    auto x = features_.row(r);
    double z = params[d] + std::inner_product(x.begin(), x.end(), params.begin(), 0.0);
    // -[y log p + (1-y) log(1-p)] = softplus(z) - y z
    total += softplus(z) - labels_[r] * z;
  }
  double penalty = 0.0;
  for (std::size_t j = 0; j < d; ++j) penalty += params[j] * params[j];
  return total / static_cast<double>(features_.rows) + 0.5 * l2_ * penalty;
}

double LogisticObjective::loss_and_gradient(std::span<const double> params, std::span<double> grad) const {
  const std::size_t d = features_.cols;
  const double n = static_cast<double>(features_.rows);
  std::fill(grad.begin(), grad.end(), 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < features_.rows; ++r) {
    auto x = features_.row(r);
    double z = params[d] + std::inner_product(x.begin(), x.end(), params.begin(), 0.0);
    total += softplus(z) - labels_[r] * z;
    double residual = sigmoid(z) - labels_[r];
    for (std::size_t j = 0; j < d; ++j) grad[j] += residual * x[j];
    grad[d] += residual;
  }
  double penalty = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    grad[j] = grad[j] / n + l2_ * params[j];
    penalty += params[j] * params[j];
  }
  grad[d] /= n;
  return total / n + 0.5 * l2_ * penalty;
}

LogisticFit fit_logistic(const FeatureMatrix& features, std::span<const int> labels,
                         const LogisticOptions& options) {
  if (labels.size() != features.rows) {
    throw Error(ErrorCode::kDomainError, "label count does not match feature rows");
  }
  if (!(options.l2_strength >= 0.0) || !std::isfinite(options.l2_strength)) {
    throw Error(ErrorCode::kDomainError, "l2 strength must be a non-negative finite number");
  }
  std::size_t positives = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error(ErrorCode::kInvalidFeature, "outcome labels must be 0 or 1");
    positives += static_cast<std::size_t>(y);
  }
  if (positives == 0 || positives == labels.size()) {
    throw Error(ErrorCode::kDegenerateLabels, "training history must contain both outcome classes",
                {{"records", labels.size()}, {"positives", positives}});
  }
  for (std::size_t i = 0; i < features.values.size(); ++i) {
    if (!std::isfinite(features.values[i])) {
      throw Error(ErrorCode::kInvalidFeature, "non-finite feature value",
                  {{"row", i / std::max<std::size_t>(features.cols, 1)},
                   {"column", i % std::max<std::size_t>(features.cols, 1)}});
    }
  }

  LogisticObjective objective(features, labels, options.l2_strength);
  const std::size_t p = objective.num_params();
  std::vector<double> params(p, 0.0), grad(p), trial(p), trial_grad(p);

  LogisticFit fit;
  double loss = objective.loss_and_gradient(params, grad);
  fit.loss_trace.push_back(loss);
  double step = options.initial_step;

  int iter = 0;
  for (; iter < options.max_iter; ++iter) {
    if (norm2(grad) <= options.tolerance) {
      fit.converged = true;
      break;
    }
    bool accepted = false;
    while (step > 1e-20) {
      for (std::size_t j = 0; j < p; ++j) trial[j] = params[j] - step * grad[j];
      double trial_loss = objective.loss_and_gradient(trial, trial_grad);
      if (trial_loss <= loss) {
        params.swap(trial);
        grad.swap(trial_grad);
        loss = trial_loss;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // step underflow: no descent possible at machine precision
    fit.loss_trace.push_back(loss);
  }
  if (!fit.converged && norm2(grad) <= options.tolerance) fit.converged = true;

  fit.iterations = iter;
  fit.final_loss = loss;
  fit.gradient_norm = norm2(grad);
  fit.intercept = params[p - 1];
  fit.weights.assign(params.begin(), params.end() - 1);
  return fit;
}

}  // namespace matchboard
