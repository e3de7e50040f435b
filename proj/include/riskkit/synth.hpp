#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riskkit/table.hpp"

namespace riskkit {

struct SynthFeature {
  std::string name;
  bool binary = false;
  double lo = 0.0, hi = 1.0;   // numeric: uniform bounds
  double prevalence = 0.5;     // binary: P(value 1)
  bool emit_as_factor = false; // binary only: emit a No/Yes factor column
  double coef = 0.0;           // contribution to the true linear predictor
};

struct SynthInteraction {
  std::string a, b;
  double coef = 0.0;
};

struct GeneratorSpec {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double intercept = 0.0;
  std::vector<SynthFeature> features;
  std::vector<SynthInteraction> interactions;
  std::string outcome_name = "outcome";
  std::string id_prefix = "R";

  json to_json() const;
  static GeneratorSpec from_json(const json& j);
  static GeneratorSpec load(const std::string& path);
};

struct SynthResult {
  Table table;             // id + features + outcome, labels included
  DataDictionary dict;     // matching data dictionary
  std::vector<double> true_risk;  // hidden oracle values, one per row
};

// Draws features from per-feature child streams of the seed, computes the
// logistic-link true risk, and samples labels Bernoulli(risk).
SynthResult generate(const GeneratorSpec& spec);

}  // namespace riskkit
