#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "riskkit/encode.hpp"
#include "riskkit/rng.hpp"

namespace riskkit {

struct Tree {
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1, right = -1;
    double leaf = 0.0;  // case fraction at a leaf
    std::int64_t count = 0;
  };
  std::vector<Node> nodes;  // nodes[0] is the root

  double predict(std::span<const double> x) const;
};

struct ForestConfig {
  std::size_t n_trees = 500;
  std::size_t mtry = 0;
  std::size_t node_size = 10;
  std::uint64_t seed = 0;
};

struct ForestModel {
  std::vector<Tree> trees;
  ForestConfig config;
  std::vector<std::string> feature_names;
};

// Per-node record of what the splitter saw and chose, for exhaustive
// enumeration checks on small instances.
struct SplitRecord {
  std::vector<std::size_t> rows;  // node's row multiset (bootstrap indices)
  std::vector<std::size_t> sampled_features;
  std::int32_t chosen_feature = -1;  // -1: node became a leaf
  double chosen_threshold = 0.0;
  double chosen_impurity = 0.0;  // weighted child Gini (average form)
};

struct SplitAudit {
  std::vector<SplitRecord> records;
};

// Grows one tree on the given row multiset: mtry features sampled per node,
// best (feature, midpoint-threshold) by weighted Gini with both children
// >= node_size, ties to lowest feature index then lowest threshold.
Tree fit_tree(const FeatureMatrix& m, const std::vector<std::size_t>& rows,
              const ForestConfig& config, Stream& stream, SplitAudit* audit = nullptr);

// Bagged ensemble; tree t draws its bootstrap sample and feature subsets from
// a stream derived as child t of the seed, so results are independent of
// build order and thread count. identity_bootstrap is a test hook replacing
// each bootstrap draw with rows 0..n-1.
ForestModel fit_forest(const FeatureMatrix& m, const ForestConfig& config,
                       bool identity_bootstrap = false, std::size_t threads = 0);

double predict_risk(const ForestModel& model, std::span<const double> x);

}  // namespace riskkit
