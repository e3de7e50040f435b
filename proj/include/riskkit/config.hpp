#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riskkit/crossval.hpp"

namespace riskkit {

struct JoinStep {
  std::string file, left_key, right_key;
};

// One TOML file drives a whole run. Paths are resolved relative to the config
// file's directory; `raw` keeps the file's content as written for echoing.
struct RunConfig {
  std::string config_dir;
  json raw;

  std::uint64_t seed = 0;
  std::string out_dir = "out";

  std::string base_file, dictionary, rules_file;  // rules optional
  std::vector<JoinStep> joins;

  std::string outcome;
  std::vector<std::string> predictors;
  std::vector<InteractionSpec> interactions;
  std::string family = "logit";
  json hyper = json::object();

  std::size_t k = 10;
  MetricKind metric = MetricKind::ap;
  int bootstrap_B = 1000;

  json tune = json::object();  // per-family grid axis overrides

  std::vector<std::string> screen_base;  // defaults to `predictors`
  std::vector<InteractionSpec> screen_interactions;
  bool screen_allow_large = false;

  std::string pdp_vary, pdp_strata;
  std::size_t pdp_grid_points = 25;

  std::string external_data, external_dictionary;

  static RunConfig load(const std::string& path);
  static RunConfig from_toml(const json& doc, const std::string& config_dir);

  std::string resolve(const std::string& rel) const;
};

}  // namespace riskkit
