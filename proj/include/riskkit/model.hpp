#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskkit/encode.hpp"
#include "riskkit/forest.hpp"
#include "riskkit/logistic.hpp"
#include "riskkit/svm.hpp"

namespace riskkit {

// Training-set column means and standard deviations, applied to later rows so
// scale-sensitive learners never see assessment data during fitting.
struct Standardizer {
  std::vector<double> mean, sd;

  static Standardizer fit(const FeatureMatrix& m);
  FeatureMatrix apply(const FeatureMatrix& m) const;
  std::vector<double> apply_row(std::span<const double> x) const;
  json to_json() const;
  static Standardizer from_json(const json& j);
};

class RiskModel {
 public:
  virtual ~RiskModel() = default;
  virtual double predict_risk(std::span<const double> x) const = 0;
  virtual const std::vector<std::string>& feature_names() const = 0;
  virtual std::string family() const = 0;
  virtual json params_json() const = 0;
};

class LogitRiskModel : public RiskModel {
 public:
  explicit LogitRiskModel(LogisticModel m) : m_(std::move(m)) {}
  double predict_risk(std::span<const double> x) const override;
  const std::vector<std::string>& feature_names() const override { return m_.feature_names; }
  std::string family() const override { return "logit"; }
  json params_json() const override;
  const LogisticModel& inner() const { return m_; }

 private:
  LogisticModel m_;
};

class SvmRiskModel : public RiskModel {
 public:
  SvmRiskModel(SvmModel m, Standardizer std) : m_(std::move(m)), std_(std::move(std)) {}
  double predict_risk(std::span<const double> x) const override;
  const std::vector<std::string>& feature_names() const override { return m_.feature_names; }
  std::string family() const override { return "svm"; }
  json params_json() const override;
  const SvmModel& inner() const { return m_; }
  const Standardizer& standardizer() const { return std_; }

 private:
  SvmModel m_;
  Standardizer std_;
};

class ForestRiskModel : public RiskModel {
 public:
  explicit ForestRiskModel(ForestModel m) : m_(std::move(m)) {}
  double predict_risk(std::span<const double> x) const override;
  const std::vector<std::string>& feature_names() const override { return m_.feature_names; }
  std::string family() const override { return "forest"; }
  json params_json() const override;
  const ForestModel& inner() const { return m_; }

 private:
  ForestModel m_;
};

// A fitting recipe: family plus hyperparameters, invoked per training set with
// a derived seed so repeated fits are reproducible.
using Learner =
    std::function<std::unique_ptr<RiskModel>(const FeatureMatrix&, std::uint64_t seed)>;

// hyper schema -- logit: {max_iter?, tol?}; svm: {kernel{...}, c, kkt_tol?};
// forest: {n_trees, mtry (0 = ceil(sqrt(k))), node_size}.
Learner make_learner(const std::string& family, const json& hyper);

// Rebuilds a model from its serialized parameters (the reverse of params_json).
std::unique_ptr<RiskModel> model_from_params(const std::string& family, const json& params,
                                             const std::vector<std::string>& feature_names);

}  // namespace riskkit
