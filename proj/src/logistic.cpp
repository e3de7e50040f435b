#include "riskkit/logistic.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "riskkit/errors.hpp"

namespace riskkit {

double inverse_logit(double lp) {
  double p;
  if (lp >= 0) {
    p = 1.0 / (1.0 + std::exp(-lp));
  } else {
    double e = std::exp(lp);
    p = e / (1.0 + e);
  }
  if (p < 1e-300) p = 1e-300;
  if (p > 1.0 - 1e-16) p = 1.0 - 1e-16;
  return p;
}

namespace {

double log1pexp(double v) {
  if (v > 0) return v + std::log1p(std::exp(-v));
  return std::log1p(std::exp(v));
}

constexpr double kSeparationBound = 30.0;  // on the standardized scale

}  // namespace

LogisticModel fit_logistic(const FeatureMatrix& m, int max_iter, double tol) {
  validate_for_fit(m);
  const std::size_t n = m.n, k = m.k;

  std::vector<double> mean(k, 0.0), sd(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += m.at(i, j);
    mean[j] = s / static_cast<double>(n);
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = m.at(i, j) - mean[j];
      ss += d * d;
    }
    sd[j] = std::sqrt(ss / static_cast<double>(n));
    if (sd[j] == 0.0)
      throw DesignError("feature '" + m.feature_names[j] + "' is constant");
  }

  Eigen::MatrixXd X(n, k + 1);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (std::size_t j = 0; j < k; ++j) X(i, j + 1) = (m.at(i, j) - mean[j]) / sd[j];
    y(i) = m.y[i];
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k + 1);
  auto deviance_at = [&](const Eigen::VectorXd& b) {
    Eigen::VectorXd eta = X * b;
    double dev = 0;
    for (std::size_t i = 0; i < n; ++i)
      dev += -2.0 * (y(i) * eta(i) - log1pexp(eta(i)));
    return dev;
  };

  double dev_prev = deviance_at(beta);
  FitMeta meta;
  meta.deviance = dev_prev;
  Eigen::VectorXd p(n), w(n);
  for (int it = 0; it <= max_iter; ++it) {
    Eigen::VectorXd eta = X * beta;
    for (std::size_t i = 0; i < n; ++i) {
      double pi = inverse_logit(eta(i));
      if (pi < 1e-12) pi = 1e-12;
      if (pi > 1.0 - 1e-12) pi = 1.0 - 1e-12;
      p(i) = pi;
      w(i) = pi * (1.0 - pi);
    }
    Eigen::VectorXd grad = X.transpose() * (y - p);
    // once the deviance rule has fired, polish until first-order optimality so
    // the score-equation residual is genuinely at machine scale
    if (meta.converged && grad.cwiseAbs().maxCoeff() < 1e-9) break;
    if (it == max_iter) break;

    Eigen::MatrixXd xtwx = X.transpose() * w.asDiagonal() * X;
    Eigen::VectorXd delta = xtwx.ldlt().solve(grad);
    if (!delta.allFinite()) throw NumericError("IRLS step is not finite");
    beta += delta;

    for (std::size_t j = 0; j < static_cast<std::size_t>(beta.size()); ++j)
      if (std::abs(beta(j)) > kSeparationBound)
        throw SeparationError("coefficient for '" +
                              (j == 0 ? std::string("(intercept)") : m.feature_names[j - 1]) +
                              "' diverged; data are (quasi-)separated");

    double dev = deviance_at(beta);
    if (!std::isfinite(dev)) throw NumericError("deviance is not finite");
    meta.iterations = it + 1;
    meta.deviance = dev;
    if (std::abs(dev_prev - dev) / (std::abs(dev) + 0.1) < tol) meta.converged = true;
    dev_prev = dev;
  }

  LogisticModel model;
  model.feature_names = m.feature_names;
  model.fit_meta = meta;
  model.coef.resize(k);
  double b0 = beta(0);
  for (std::size_t j = 0; j < k; ++j) {
    model.coef[j] = beta(j + 1) / sd[j];
    b0 -= beta(j + 1) * mean[j] / sd[j];
  }
  model.intercept = b0;

  // standard errors from the Fisher information at the fit, original scale
  Eigen::MatrixXd Xo(n, k + 1);
  for (std::size_t i = 0; i < n; ++i) {
    Xo(i, 0) = 1.0;
    for (std::size_t j = 0; j < k; ++j) Xo(i, j + 1) = m.at(i, j);
  }
  Eigen::MatrixXd info = Xo.transpose() * w.asDiagonal() * Xo;
  Eigen::MatrixXd cov = info.ldlt().solve(Eigen::MatrixXd::Identity(k + 1, k + 1));
  model.std_errors.resize(k + 1);
  for (std::size_t j = 0; j <= k; ++j) {
    double v = cov(j, j);
    model.std_errors[j] = v > 0 && std::isfinite(v) ? std::sqrt(v)
                                                    : std::numeric_limits<double>::quiet_NaN();
  }
  return model;
}

double linear_predictor(const LogisticModel& model, std::span<const double> x) {
  if (x.size() != model.coef.size())
    throw ShapeError("row has " + std::to_string(x.size()) + " features, model expects " +
                     std::to_string(model.coef.size()));
  double lp = model.intercept;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!std::isfinite(x[j])) throw NumericError("non-finite feature value");
    lp += model.coef[j] * x[j];
  }
  return lp;
}

double predict_risk(const LogisticModel& model, std::span<const double> x) {
  return inverse_logit(linear_predictor(model, x));
}

double log_likelihood(const FeatureMatrix& m, std::span<const double> beta) {
  if (beta.size() != m.k + 1) throw ShapeError("coefficient vector length mismatch");
  double ll = 0;
  for (std::size_t i = 0; i < m.n; ++i) {
    double eta = beta[0];
    for (std::size_t j = 0; j < m.k; ++j) eta += beta[j + 1] * m.at(i, j);
    ll += m.y[i] * eta - log1pexp(eta);
  }
  return ll;
}

std::vector<double> score_gradient(const FeatureMatrix& m, std::span<const double> beta) {
  if (beta.size() != m.k + 1) throw ShapeError("coefficient vector length mismatch");
  std::vector<double> g(m.k + 1, 0.0);
  for (std::size_t i = 0; i < m.n; ++i) {
    double eta = beta[0];
    for (std::size_t j = 0; j < m.k; ++j) eta += beta[j + 1] * m.at(i, j);
    double resid = m.y[i] - inverse_logit(eta);
    g[0] += resid;
    for (std::size_t j = 0; j < m.k; ++j) g[j + 1] += resid * m.at(i, j);
  }
  return g;
}

}  // namespace riskkit
