#pragma once

#include <span>
#include <string>
#include <vector>

#include "riskkit/encode.hpp"

namespace riskkit {

struct FitMeta {
  int iterations = 0;
  double deviance = 0.0;
  bool converged = false;
};

struct LogisticModel {
  double intercept = 0.0;
  std::vector<double> coef;        // original (unstandardized) scale
  std::vector<double> std_errors;  // intercept first, then coefficients
  std::vector<std::string> feature_names;
  FitMeta fit_meta;
};

// Newton/IRLS on internally standardized features; coefficients are reported
// on the original scale. Convergence: relative deviance change < tol.
LogisticModel fit_logistic(const FeatureMatrix& m, int max_iter = 50, double tol = 1e-8);

double linear_predictor(const LogisticModel& model, std::span<const double> x);
double predict_risk(const LogisticModel& model, std::span<const double> x);

// Inverse logit clamped into (0,1) so extreme linear predictors stay usable
// as probabilities downstream.
double inverse_logit(double lp);

// Binomial log-likelihood and its gradient at an arbitrary coefficient vector
// (intercept first), original scale. Exposed for optimality checks.
double log_likelihood(const FeatureMatrix& m, std::span<const double> beta);
std::vector<double> score_gradient(const FeatureMatrix& m, std::span<const double> beta);

}  // namespace riskkit
