#include "riskkit/model.hpp"

#include <cmath>

#include "riskkit/errors.hpp"

namespace riskkit {

Standardizer Standardizer::fit(const FeatureMatrix& m) {
  Standardizer s;
  s.mean.assign(m.k, 0.0);
  s.sd.assign(m.k, 1.0);
  for (std::size_t j = 0; j < m.k; ++j) {
    double acc = 0;
    for (std::size_t i = 0; i < m.n; ++i) acc += m.at(i, j);
    s.mean[j] = acc / static_cast<double>(m.n);
    double ss = 0;
    for (std::size_t i = 0; i < m.n; ++i) {
      double d = m.at(i, j) - s.mean[j];
      ss += d * d;
    }
    double sd = std::sqrt(ss / static_cast<double>(m.n));
    s.sd[j] = sd == 0.0 ? 1.0 : sd;  // constant columns pass through as zeros
  }
  return s;
}

FeatureMatrix Standardizer::apply(const FeatureMatrix& m) const {
  if (mean.size() != m.k) throw ShapeError("standardizer width mismatch");
  FeatureMatrix out = m;
  for (std::size_t i = 0; i < m.n; ++i)
    for (std::size_t j = 0; j < m.k; ++j)
      out.at(i, j) = (m.at(i, j) - mean[j]) / sd[j];
  return out;
}

std::vector<double> Standardizer::apply_row(std::span<const double> x) const {
  if (mean.size() != x.size()) throw ShapeError("standardizer width mismatch");
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / sd[j];
  return out;
}

json Standardizer::to_json() const { return json{{"mean", mean}, {"sd", sd}}; }

Standardizer Standardizer::from_json(const json& j) {
  Standardizer s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.sd = j.at("sd").get<std::vector<double>>();
  if (s.mean.size() != s.sd.size()) throw SchemaError("standardizer arrays misaligned");
  return s;
}

double LogitRiskModel::predict_risk(std::span<const double> x) const {
  return riskkit::predict_risk(m_, x);
}

json LogitRiskModel::params_json() const {
  return json{{"intercept", m_.intercept},
              {"coef", m_.coef},
              {"std_errors", m_.std_errors},
              {"fit", json{{"iterations", m_.fit_meta.iterations},
                           {"deviance", m_.fit_meta.deviance},
                           {"converged", m_.fit_meta.converged}}}};
}

double SvmRiskModel::predict_risk(std::span<const double> x) const {
  return riskkit::predict_risk(m_, std_.apply_row(x));
}

json SvmRiskModel::params_json() const {
  json j{{"kernel", m_.kernel.to_json()},
         {"c", m_.c},
         {"support_vectors", m_.support_vectors},
         {"alphas", m_.alphas},
         {"bias", m_.bias},
         {"standardization", std_.to_json()}};
  if (m_.platt) j["platt"] = json{{"a", m_.platt->a}, {"b", m_.platt->b}};
  return j;
}

double ForestRiskModel::predict_risk(std::span<const double> x) const {
  return riskkit::predict_risk(m_, x);
}

json ForestRiskModel::params_json() const {
  json trees = json::array();
  for (const auto& t : m_.trees) {
    json nodes = json::array();
    for (const auto& nd : t.nodes)
      nodes.push_back(json::array(
          {nd.feature, nd.threshold, nd.left, nd.right, nd.leaf, nd.count}));
    trees.push_back(std::move(nodes));
  }
  return json{{"config", json{{"n_trees", m_.config.n_trees},
                              {"mtry", m_.config.mtry},
                              {"node_size", m_.config.node_size},
                              {"seed", m_.config.seed}}},
              {"trees", std::move(trees)}};
}

namespace {

Learner make_learner_impl(const std::string& family, const json& hyper) {
  if (family == "logit") {
    int max_iter = hyper.value("max_iter", 50);
    double tol = hyper.value("tol", 1e-8);
    return [max_iter, tol](const FeatureMatrix& m, std::uint64_t) {
      return std::unique_ptr<RiskModel>(
          std::make_unique<LogitRiskModel>(fit_logistic(m, max_iter, tol)));
    };
  }
  if (family == "svm") {
    json kernel = hyper.contains("kernel") ? hyper["kernel"] : json{{"kind", "gaussian"}};
    if (!kernel.is_object() || !kernel.contains("kind") || !kernel["kind"].is_string())
      throw ConfigError("svm kernel must be an object with a string 'kind'");
    std::string kind = kernel["kind"].get<std::string>();
    if (kind != "linear" && kind != "gaussian" && kind != "polynomial")
      throw ConfigError("unknown kernel kind '" + kind + "'");
    double c = hyper.value("c", 1.0);
    if (c <= 0) throw ConfigError("soft-margin cost must be positive");
    double kkt_tol = hyper.value("kkt_tol", 1e-3);
    return [kernel, kind, c, kkt_tol](const FeatureMatrix& m, std::uint64_t seed) {
      json kj = kernel;
      // the 1/k heuristic is resolved against the training width at fit time
      if ((kind == "gaussian" || kind == "polynomial") &&
          (!kj.contains("gamma") || kj["gamma"].get<double>() <= 0))
        kj["gamma"] = 1.0 / static_cast<double>(m.k);
      KernelSpec spec = KernelSpec::from_json(kj);
      Standardizer std = Standardizer::fit(m);
      SvmModel fitted = fit_svm(std.apply(m), spec, c, kkt_tol, seed);
      return std::unique_ptr<RiskModel>(
          std::make_unique<SvmRiskModel>(std::move(fitted), std::move(std)));
    };
  }
  if (family == "forest") {
    ForestConfig base;
    base.n_trees = hyper.value("n_trees", std::size_t{500});
    base.mtry = hyper.value("mtry", std::size_t{0});
    base.node_size = hyper.value("node_size", std::size_t{10});
    return [base](const FeatureMatrix& m, std::uint64_t seed) {
      ForestConfig cfg = base;
      if (cfg.mtry == 0)
        cfg.mtry = static_cast<std::size_t>(
            std::ceil(std::sqrt(static_cast<double>(m.k))));
      cfg.seed = seed;
      return std::unique_ptr<RiskModel>(
          std::make_unique<ForestRiskModel>(fit_forest(m, cfg)));
    };
  }
  throw ConfigError("unknown learner family '" + family + "'");
}

}  // namespace

Learner make_learner(const std::string& family, const json& hyper) {
  try {
    return make_learner_impl(family, hyper);
  } catch (const json::exception& e) {
    throw ConfigError("bad hyperparameters for family '" + family + "': " + e.what());
  }
}

std::unique_ptr<RiskModel> model_from_params(const std::string& family, const json& params,
                                             const std::vector<std::string>& feature_names) {
  if (family == "logit") {
    LogisticModel m;
    m.intercept = params.at("intercept").get<double>();
    m.coef = params.at("coef").get<std::vector<double>>();
    if (params.contains("std_errors"))
      m.std_errors = params["std_errors"].get<std::vector<double>>();
    m.feature_names = feature_names;
    if (m.coef.size() != feature_names.size())
      throw SchemaError("logit parameter count does not match feature names");
    if (params.contains("fit")) {
      m.fit_meta.iterations = params["fit"].value("iterations", 0);
      m.fit_meta.deviance = params["fit"].value("deviance", 0.0);
      m.fit_meta.converged = params["fit"].value("converged", false);
    }
    return std::make_unique<LogitRiskModel>(std::move(m));
  }
  if (family == "svm") {
    SvmModel m;
    m.kernel = KernelSpec::from_json(params.at("kernel"));
    m.c = params.at("c").get<double>();
    m.support_vectors =
        params.at("support_vectors").get<std::vector<std::vector<double>>>();
    m.alphas = params.at("alphas").get<std::vector<double>>();
    m.bias = params.at("bias").get<double>();
    if (params.contains("platt"))
      m.platt = PlattParams{params["platt"].at("a").get<double>(),
                            params["platt"].at("b").get<double>()};
    m.feature_names = feature_names;
    if (m.support_vectors.size() != m.alphas.size())
      throw SchemaError("svm support vectors and alphas misaligned");
    Standardizer std = Standardizer::from_json(params.at("standardization"));
    return std::make_unique<SvmRiskModel>(std::move(m), std::move(std));
  }
  if (family == "forest") {
    ForestModel m;
    const json& cfg = params.at("config");
    m.config.n_trees = cfg.at("n_trees").get<std::size_t>();
    m.config.mtry = cfg.at("mtry").get<std::size_t>();
    m.config.node_size = cfg.at("node_size").get<std::size_t>();
    m.config.seed = cfg.at("seed").get<std::uint64_t>();
    for (const auto& tj : params.at("trees")) {
      Tree t;
      for (const auto& nj : tj) {
        if (!nj.is_array() || nj.size() != 6) throw SchemaError("malformed tree node");
        Tree::Node nd;
        nd.feature = nj[0].get<std::int32_t>();
        nd.threshold = nj[1].get<double>();
        nd.left = nj[2].get<std::int32_t>();
        nd.right = nj[3].get<std::int32_t>();
        nd.leaf = nj[4].get<double>();
        nd.count = nj[5].get<std::int64_t>();
        t.nodes.push_back(nd);
      }
      if (t.nodes.empty()) throw SchemaError("tree with no nodes");
      m.trees.push_back(std::move(t));
    }
    if (m.trees.size() != m.config.n_trees)
      throw SchemaError("tree count does not match forest config");
    m.feature_names = feature_names;
    return std::make_unique<ForestRiskModel>(std::move(m));
  }
  throw ConfigError("unknown learner family '" + family + "'");
}

}  // namespace riskkit
