#include <doctest.h>

#include <random>

#include "matchboard/logistic.hpp"
#include "oracles.hpp"

using namespace matchboard;
using namespace matchboard::testing;

TEST_CASE("sigmoid is stable at the extremes") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(800.0) == 1.0);
  CHECK(sigmoid(-800.0) == doctest::Approx(0.0));
  CHECK(std::isfinite(sigmoid(-800.0)));
}

TEST_CASE("analytic gradient agrees with central differences") {
  SyntheticLogistic data = synthetic_logistic(5, 200, {0.8, -1.2, 0.3}, 0.4);
  LogisticObjective objective(data.features, data.labels, 0.01);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int point = 0; point < 10; ++point) {
    std::vector<double> params(objective.num_params());
    for (double& p : params) p = normal(rng);
    std::vector<double> grad(params.size());
    double loss = objective.loss_and_gradient(params, grad);
    CHECK(loss == doctest::Approx(objective.loss(params)).epsilon(1e-14));
    CHECK(relative_error(grad, finite_difference_gradient(objective, params)) < 1e-6);
  }
}

TEST_CASE("intercept is not penalised") {
  SyntheticLogistic data = synthetic_logistic(6, 50, {0.5}, 0.0);
  LogisticObjective plain(data.features, data.labels, 0.0);
  LogisticObjective ridge(data.features, data.labels, 10.0);
  std::vector<double> params = {0.0, 3.0};
  CHECK(plain.loss(params) == ridge.loss(params));
}

TEST_CASE("training loss trace is non-increasing and the fit recovers weights") {
  SyntheticLogistic data = synthetic_logistic(17, 3000, {1.0, -0.5}, 0.25);
  LogisticFit fit = fit_logistic(data.features, data.labels, {0.0, 5000, 1e-6, 1.0});
  for (std::size_t i = 1; i < fit.loss_trace.size(); ++i) CHECK(fit.loss_trace[i] <= fit.loss_trace[i - 1]);
  CHECK(fit.converged);
  CHECK(fit.gradient_norm <= 1e-6);
  CHECK(fit.weights[0] == doctest::Approx(1.0).epsilon(0.15));
  CHECK(fit.weights[1] == doctest::Approx(-0.5).epsilon(0.3));
  CHECK(fit.final_loss == fit.loss_trace.back());
}

TEST_CASE("max_iter stops training and is reported as not converged") {
  SyntheticLogistic data = synthetic_logistic(3, 100, {1.0}, 0.0);
  LogisticFit fit = fit_logistic(data.features, data.labels, {0.0, 3, 1e-12, 1.0});
  CHECK(fit.iterations == 3);
  CHECK_FALSE(fit.converged);
}

TEST_CASE("single-class labels are rejected") {
  FeatureMatrix x{3, 1, {0.1, 0.2, 0.3}};
  std::vector<int> y = {1, 1, 1};
  try {
    fit_logistic(x, y, {});
    FAIL("expected DEGENERATE_LABELS");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateLabels);
  }
}

TEST_CASE("non-finite features and bad labels are rejected") {
  FeatureMatrix x{2, 1, {0.1, std::numeric_limits<double>::quiet_NaN()}};
  std::vector<int> y = {0, 1};
  try {
    fit_logistic(x, y, {});
    FAIL("expected INVALID_FEATURE");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidFeature);
  }
  FeatureMatrix ok{2, 1, {0.1, 0.2}};
  std::vector<int> bad = {0, 2};
  CHECK_THROWS_AS(fit_logistic(ok, bad, {}), Error);
}
