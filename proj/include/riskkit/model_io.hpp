#pragma once

#include <memory>
#include <string>
#include <vector>

#include "riskkit/crossval.hpp"
#include "riskkit/model.hpp"

namespace riskkit {

// A fitted model plus everything a second team needs to apply it to their own
// data: the encoding recipe, family parameters, and provenance. Serialized as
// versioned JSON; round-trip preserves predictions bitwise.
struct PortableModel {
  int format_version = 1;
  std::string family;
  EncodingRecipe recipe;
  std::unique_ptr<RiskModel> model;
  json provenance;  // fit_timestamp, seed, train_fingerprint

  json to_json() const;
  static PortableModel from_json(const json& j);
  void save(const std::string& path) const;
  static PortableModel load(const std::string& path);
};

// FNV-1a over names, shape, features, and labels; hex string for provenance.
std::string matrix_fingerprint(const FeatureMatrix& m);

std::string now_utc_iso();

// Encodes the table, fits the family on ALL rows, stamps provenance.
// timestamp empty -> current UTC time.
PortableModel fit_portable(const Table& t, const std::string& outcome,
                           const std::vector<std::string>& predictors,
                           const std::vector<InteractionSpec>& interactions,
                           const std::string& family, const json& hyper,
                           std::uint64_t seed, const std::string& timestamp = "");

struct PredictionResult {
  ScoredSample scored;  // s and ids filled; y left empty (labels unread)
  std::size_t dropped_rows = 0;
  std::vector<std::string> dropped_ids;
};

// Phase one of external validation: re-derive the training encoding and score
// every complete-case row. The outcome column is never touched here.
PredictionResult predict_table(const PortableModel& pm, const Table& t);

struct LabeledPrediction {
  ScoredSample sample;
  std::size_t unlabeled_rows = 0;  // scored rows whose outcome was missing
};

// Phase two: attach observed outcomes to already-computed scores by record id.
LabeledPrediction attach_labels(const PredictionResult& pred, const Table& t,
                                const std::string& outcome);

}  // namespace riskkit
