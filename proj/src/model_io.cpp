#include "riskkit/model_io.hpp"

#include <chrono>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include "riskkit/errors.hpp"

namespace riskkit {

namespace {

struct Fnv1a {
  std::uint64_t h = 14695981039346656037ULL;

  void bytes(const void* p, std::size_t n) {
    auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  }
  void str(const std::string& s) { bytes(s.data(), s.size() + 1); }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    u64(bits);
  }
};

}  // namespace

std::string matrix_fingerprint(const FeatureMatrix& m) {
  Fnv1a f;
  f.u64(m.n);
  f.u64(m.k);
  for (const auto& name : m.feature_names) f.str(name);
  for (double v : m.x) f.f64(v);
  for (auto v : m.y) f.bytes(&v, 1);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(f.h));
  return buf;
}

std::string now_utc_iso() {
  auto now = std::chrono::system_clock::now();
  std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json PortableModel::to_json() const {
  if (!model) throw StateError("portable model has no fitted model");
  return json{{"format_version", format_version},
              {"family", family},
              {"recipe", recipe.to_json()},
              {"params", model->params_json()},
              {"provenance", provenance}};
}

PortableModel PortableModel::from_json(const json& j) {
  PortableModel pm;
  if (!j.contains("format_version") || !j["format_version"].is_number_integer())
    throw SchemaError("model file lacks an integer format_version");
  pm.format_version = j["format_version"].get<int>();
  if (pm.format_version != 1)
    throw SchemaError("unsupported model format_version " +
                      std::to_string(pm.format_version) + " (expected 1)");
  pm.family = j.at("family").get<std::string>();
  pm.recipe = EncodingRecipe::from_json(j.at("recipe"));
  pm.model = model_from_params(pm.family, j.at("params"), pm.recipe.feature_names);
  pm.provenance = j.value("provenance", json::object());
  return pm;
}

void PortableModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << to_json().dump(2) << "\n";
}

PortableModel PortableModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open model file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError("model file '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(j);
}

PortableModel fit_portable(const Table& t, const std::string& outcome,
                           const std::vector<std::string>& predictors,
                           const std::vector<InteractionSpec>& interactions,
                           const std::string& family, const json& hyper,
                           std::uint64_t seed, const std::string& timestamp) {
  EncodeResult enc = encode_for_training(t, outcome, predictors, interactions);
  validate_for_fit(enc.m);
  Learner learner = make_learner(family, hyper);
  PortableModel pm;
  pm.family = family;
  pm.recipe = enc.recipe;
  pm.model = learner(enc.m, seed);
  pm.provenance = json{{"fit_timestamp", timestamp.empty() ? now_utc_iso() : timestamp},
                       {"seed", seed},
                       {"train_fingerprint", matrix_fingerprint(enc.m)},
                       {"train_rows", enc.m.n},
                       {"dropped_rows", enc.dropped_rows}};
  return pm;
}

PredictionResult predict_table(const PortableModel& pm, const Table& t) {
  if (!pm.model) throw StateError("portable model has no fitted model");
  EncodeResult enc = encode_with_recipe(t, pm.recipe, /*require_outcome=*/false);
  PredictionResult res;
  res.dropped_rows = enc.dropped_rows;
  res.dropped_ids = enc.dropped_ids;
  res.scored.ids = enc.m.record_ids;
  res.scored.s.reserve(enc.m.n);
  for (std::size_t i = 0; i < enc.m.n; ++i)
    res.scored.s.push_back(pm.model->predict_risk(enc.m.row(i)));
  return res;
}

LabeledPrediction attach_labels(const PredictionResult& pred, const Table& t,
                                const std::string& outcome) {
  const Column& yc = t.col(outcome);
  if (yc.kind != ColumnKind::numeric)
    throw LabelError("outcome column '" + outcome + "' must be numeric 0/1");
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < t.row_count; ++i) by_id[t.record_id(i)] = i;
  LabeledPrediction out;
  for (std::size_t i = 0; i < pred.scored.s.size(); ++i) {
    const std::string& id = pred.scored.ids[i];
    auto it = by_id.find(id);
    if (it == by_id.end())
      throw IntegrityError("scored record '" + id + "' not found in the table");
    std::size_t row = it->second;
    if (yc.is_missing(row)) {
      ++out.unlabeled_rows;
      continue;
    }
    double v = yc.num[row];
    if (v != 0.0 && v != 1.0)
      throw LabelError("outcome column '" + outcome + "' must be numeric 0/1");
    out.sample.y.push_back(static_cast<std::int8_t>(v));
    out.sample.s.push_back(pred.scored.s[i]);
    out.sample.ids.push_back(id);
  }
  return out;
}

}  // namespace riskkit
