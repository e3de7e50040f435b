#include "riskkit/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "riskkit/errors.hpp"

namespace riskkit {

double Tree::predict(std::span<const double> x) const {
  std::int32_t at = 0;
  while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
    const Node& nd = nodes[static_cast<std::size_t>(at)];
    at = x[static_cast<std::size_t>(nd.feature)] < nd.threshold ? nd.left : nd.right;
  }
  return nodes[static_cast<std::size_t>(at)].leaf;
}

namespace {

struct TreeBuilder {
  const FeatureMatrix& m;
  const ForestConfig& cfg;
  Stream& stream;
  SplitAudit* audit;
  Tree tree;

  std::size_t make_leaf(const std::vector<std::size_t>& rows, std::size_t cases) {
    Tree::Node nd;
    nd.leaf = static_cast<double>(cases) / static_cast<double>(rows.size());
    nd.count = static_cast<std::int64_t>(rows.size());
    tree.nodes.push_back(nd);
    return tree.nodes.size() - 1;
  }

  // Impurity bookkeeping uses the "count times Gini" form 2c(n-c)/n so the
  // parent/children comparison needs no common division.
  static double gini_mass(std::size_t cases, std::size_t total) {
    double c = static_cast<double>(cases), n = static_cast<double>(total);
    return 2.0 * c * (n - c) / n;
  }

  std::size_t build(const std::vector<std::size_t>& rows) {
    std::size_t cases = 0;
    for (auto r : rows)
      if (m.y[r] == 1) cases++;

    const bool may_split = cases != 0 && cases != rows.size() &&
                           rows.size() >= 2 * cfg.node_size;

    if (!may_split) {
      if (audit) audit->records.push_back({rows, {}, -1, 0.0, 0.0});
      return make_leaf(rows, cases);
    }

    // mtry distinct features via partial Fisher-Yates
    std::vector<std::size_t> feats(m.k);
    std::iota(feats.begin(), feats.end(), 0);
    for (std::size_t i = 0; i < cfg.mtry; ++i) {
      std::size_t j = i + static_cast<std::size_t>(stream.next_below(m.k - i));
      std::swap(feats[i], feats[j]);
    }
    feats.resize(cfg.mtry);

    bool found = false;
    double best_mass = 0.0, best_thr = 0.0;
    std::int32_t best_feat = -1;
    std::vector<std::pair<double, std::int8_t>> vals;
    for (auto f : feats) {
      vals.clear();
      for (auto r : rows) vals.emplace_back(m.at(r, f), m.y[r]);
      std::sort(vals.begin(), vals.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      std::size_t left_n = 0, left_c = 0;
      for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
        left_n++;
        if (vals[i].second == 1) left_c++;
        if (vals[i].first == vals[i + 1].first) continue;  // not a boundary
        double thr = (vals[i].first + vals[i + 1].first) / 2.0;
        // a midpoint must strictly separate the neighbors or the counted
        // partition would not match the routing rule x < thr
        if (!(thr > vals[i].first && thr <= vals[i + 1].first)) continue;
        std::size_t right_n = rows.size() - left_n, right_c = cases - left_c;
        if (left_n < cfg.node_size || right_n < cfg.node_size) continue;
        double mass = gini_mass(left_c, left_n) + gini_mass(right_c, right_n);
        std::int32_t fi = static_cast<std::int32_t>(f);
        if (!found || mass < best_mass ||
            (mass == best_mass &&
             (fi < best_feat || (fi == best_feat && thr < best_thr)))) {
          found = true;
          best_mass = mass;
          best_feat = fi;
          best_thr = thr;
        }
      }
    }

    if (!found || best_mass >= gini_mass(cases, rows.size())) {
      if (audit) audit->records.push_back({rows, feats, -1, 0.0, 0.0});
      return make_leaf(rows, cases);
    }
    if (audit)
      audit->records.push_back({rows, feats, best_feat, best_thr,
                                best_mass / static_cast<double>(rows.size())});

    std::vector<std::size_t> left_rows, right_rows;
    for (auto r : rows)
      (m.at(r, static_cast<std::size_t>(best_feat)) < best_thr ? left_rows : right_rows)
          .push_back(r);

    std::size_t idx = tree.nodes.size();
    tree.nodes.push_back({});
    tree.nodes[idx].feature = best_feat;
    tree.nodes[idx].threshold = best_thr;
    tree.nodes[idx].count = static_cast<std::int64_t>(rows.size());
    std::size_t li = build(left_rows);
    std::size_t ri = build(right_rows);
    tree.nodes[idx].left = static_cast<std::int32_t>(li);
    tree.nodes[idx].right = static_cast<std::int32_t>(ri);
    return idx;
  }
};

void validate_config(const ForestConfig& cfg, const FeatureMatrix& m) {
  if (cfg.n_trees == 0) throw ConfigError("n_trees must be positive");
  if (cfg.node_size == 0) throw ConfigError("node_size must be positive");
  if (cfg.mtry == 0 || cfg.mtry > m.k)
    throw ConfigError("mtry must lie in [1, " + std::to_string(m.k) + "], got " +
                      std::to_string(cfg.mtry));
}

}  // namespace

Tree fit_tree(const FeatureMatrix& m, const std::vector<std::size_t>& rows,
              const ForestConfig& config, Stream& stream, SplitAudit* audit) {
  if (rows.empty()) throw ShapeError("fit_tree needs a non-empty row set");
  validate_config(config, m);
  TreeBuilder b{m, config, stream, audit, {}};
  b.build(rows);
  return std::move(b.tree);
}

ForestModel fit_forest(const FeatureMatrix& m, const ForestConfig& config,
                       bool identity_bootstrap, std::size_t threads) {
  validate_for_fit(m);
  validate_config(config, m);

  ForestModel model;
  model.config = config;
  model.feature_names = m.feature_names;
  model.trees.resize(config.n_trees);

  auto build_one = [&](std::size_t t) {
    Stream stream = child_stream(config.seed, t);
    std::vector<std::size_t> rows(m.n);
    if (identity_bootstrap) {
      std::iota(rows.begin(), rows.end(), 0);
    } else {
      for (std::size_t i = 0; i < m.n; ++i)
        rows[i] = static_cast<std::size_t>(stream.next_below(m.n));
    }
    model.trees[t] = fit_tree(m, rows, config, stream);
  };

  std::size_t want = threads ? threads : std::thread::hardware_concurrency();
  want = std::min(std::max<std::size_t>(want, 1), config.n_trees);
  if (want <= 1) {
    for (std::size_t t = 0; t < config.n_trees; ++t) build_one(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < want; ++w)
      pool.emplace_back([&] {
        for (std::size_t t = next.fetch_add(1); t < config.n_trees; t = next.fetch_add(1))
          build_one(t);
      });
    for (auto& th : pool) th.join();
  }
  return model;
}

double predict_risk(const ForestModel& model, std::span<const double> x) {
  if (x.size() != model.feature_names.size())
    throw ShapeError("row has " + std::to_string(x.size()) + " features, model expects " +
                     std::to_string(model.feature_names.size()));
  double s = 0;
  for (const auto& t : model.trees) s += t.predict(x);
  return s / static_cast<double>(model.trees.size());
}

}  // namespace riskkit
