#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace matchboard {

// Row-major design matrix without the intercept column.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
};

double sigmoid(double z);

// Mean negative log-likelihood of a logistic model plus (l2/2)·||w||².
// The intercept is not penalised. Parameters are laid out as [w_0..w_{d-1}, b].
class LogisticObjective {
 public:
  LogisticObjective(const FeatureMatrix& features, std::span<const int> labels, double l2_strength);

  std::size_t num_params() const { return features_.cols + 1; }
  double loss(std::span<const double> params) const;
  // Writes the analytic gradient into `grad` and returns the loss at `params`.
  double loss_and_gradient(std::span<const double> params, std::span<double> grad) const;

 private:
  const FeatureMatrix& features_;
  std::span<const int> labels_;
  double l2_;
};

struct LogisticOptions {
  double l2_strength = 0.0;
  int max_iter = 5000;
  double tolerance = 1e-6;
  double initial_step = 1.0;
};

struct LogisticFit {
  std::vector<double> weights;
  double intercept = 0.0;
  int iterations = 0;
  double final_loss = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;  // gradient norm reached tolerance (otherwise max_iter or step underflow)
  std::vector<double> loss_trace;  // loss after every accepted step, starting at the zero model
};

// Batch gradient descent; the step is halved whenever a trial step would increase the loss,
// so the loss trace is non-increasing.
// Throws kDegenerateLabels when the labels do not contain both classes and kInvalidFeature
// for non-finite inputs or labels outside {0,1}.
LogisticFit fit_logistic(const FeatureMatrix& features, std::span<const int> labels,
                         const LogisticOptions& options);

}  // namespace matchboard
