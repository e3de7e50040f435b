#include "riskkit/config.hpp"

#include <filesystem>

#include "riskkit/errors.hpp"
#include "riskkit/toml_lite.hpp"

namespace riskkit {

namespace {

std::vector<std::string> string_list(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw ConfigError(what + " must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::vector<InteractionSpec> interaction_list(const json& j, const std::string& what) {
  std::vector<InteractionSpec> out;
  for (const auto& text : string_list(j, what)) out.push_back(parse_interaction(text));
  return out;
}

}  // namespace

RunConfig RunConfig::from_toml(const json& doc, const std::string& config_dir) {
  RunConfig cfg;
  cfg.config_dir = config_dir;
  cfg.raw = doc;

  const json run = doc.value("run", json::object());
  if (run.contains("seed")) {
    if (!run["seed"].is_number_integer() || run["seed"].get<std::int64_t>() < 0)
      throw ConfigError("run.seed must be a non-negative integer");
    cfg.seed = run["seed"].get<std::uint64_t>();
  }
  cfg.out_dir = run.value("out_dir", "out");

  if (!doc.contains("data")) throw ConfigError("config needs a [data] table");
  const json& data = doc["data"];
  auto files = string_list(data.value("files", json::array()), "data.files");
  if (files.empty()) throw ConfigError("data.files must list at least one CSV");
  cfg.base_file = files[0];
  cfg.dictionary = data.value("dictionary", "");
  if (cfg.dictionary.empty()) throw ConfigError("data.dictionary is required");
  cfg.rules_file = data.value("rules", "");
  auto lks = string_list(data.value("join_left_keys", json::array()), "data.join_left_keys");
  auto rks = string_list(data.value("join_right_keys", json::array()), "data.join_right_keys");
  if (lks.size() != files.size() - 1 || rks.size() != files.size() - 1)
    throw ConfigError("join key lists must have one entry per joined file (" +
                      std::to_string(files.size() - 1) + ")");
  for (std::size_t i = 1; i < files.size(); ++i)
    cfg.joins.push_back({files[i], lks[i - 1], rks[i - 1]});

  if (!doc.contains("model")) throw ConfigError("config needs a [model] table");
  const json& model = doc["model"];
  cfg.outcome = model.value("outcome", "");
  if (cfg.outcome.empty()) throw ConfigError("model.outcome is required");
  cfg.predictors = string_list(model.value("predictors", json::array()), "model.predictors");
  if (cfg.predictors.empty()) throw ConfigError("model.predictors must be non-empty");
  if (model.contains("interactions"))
    cfg.interactions = interaction_list(model["interactions"], "model.interactions");
  cfg.family = model.value("family", "logit");
  if (cfg.family != "logit" && cfg.family != "svm" && cfg.family != "forest")
    throw ConfigError("model.family must be logit, svm, or forest");
  cfg.hyper = model.value("hyper", json::object());

  const json cv = doc.value("cv", json::object());
  if (cv.contains("k")) {
    if (!cv["k"].is_number_integer() || cv["k"].get<std::int64_t>() < 2)
      throw ConfigError("cv.k must be an integer >= 2");
    cfg.k = cv["k"].get<std::size_t>();
  }
  std::string metric = cv.value("metric", "ap");
  if (metric == "auc") cfg.metric = MetricKind::auc;
  else if (metric == "ap") cfg.metric = MetricKind::ap;
  else throw ConfigError("cv.metric must be auc or ap");
  if (cv.contains("bootstrap_B")) {
    if (!cv["bootstrap_B"].is_number_integer())
      throw ConfigError("cv.bootstrap_B must be an integer");
    cfg.bootstrap_B = cv["bootstrap_B"].get<int>();
  }

  cfg.tune = doc.value("tune", json::object());

  const json screen = doc.value("screen", json::object());
  cfg.screen_base = screen.contains("base")
                        ? string_list(screen["base"], "screen.base")
                        : cfg.predictors;
  cfg.screen_interactions = screen.contains("interactions")
                                ? interaction_list(screen["interactions"],
                                                   "screen.interactions")
                                : cfg.interactions;
  cfg.screen_allow_large = screen.value("allow_large", false);

  const json pdp = doc.value("pdp", json::object());
  cfg.pdp_vary = pdp.value("vary", "");
  cfg.pdp_strata = pdp.value("strata", "");
  if (pdp.contains("grid_points")) {
    if (!pdp["grid_points"].is_number_integer() ||
        pdp["grid_points"].get<std::int64_t>() < 2)
      throw ConfigError("pdp.grid_points must be an integer >= 2");
    cfg.pdp_grid_points = pdp["grid_points"].get<std::size_t>();
  }

  const json ext = doc.value("external", json::object());
  cfg.external_data = ext.value("data", "");
  cfg.external_dictionary = ext.value("dictionary", "");

  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  json doc = load_toml(path);
  std::string dir = std::filesystem::path(path).parent_path().string();
  return from_toml(doc, dir.empty() ? "." : dir);
}

std::string RunConfig::resolve(const std::string& rel) const {
  if (rel.empty()) return rel;
  std::filesystem::path p(rel);
  if (p.is_absolute()) return rel;
  return (std::filesystem::path(config_dir) / p).string();
}

}  // namespace riskkit
