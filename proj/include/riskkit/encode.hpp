#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "riskkit/table.hpp"

namespace riskkit {

struct InteractionSpec {
  std::string a, b;
  friend bool operator==(const InteractionSpec&, const InteractionSpec&) = default;
};

// Parses "a*b"; rejects anything without exactly one '*'.
InteractionSpec parse_interaction(const std::string& text);

struct FeatureMatrix {
  std::vector<std::string> feature_names;
  std::size_t n = 0, k = 0;
  std::vector<double> x;  // row-major n*k
  std::vector<std::int8_t> y;
  std::vector<std::string> record_ids;

  double at(std::size_t i, std::size_t j) const { return x[i * k + j]; }
  double& at(std::size_t i, std::size_t j) { return x[i * k + j]; }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * k, k}; }
  std::size_t feature_index(const std::string& name) const;  // throws SchemaError
};

void validate_for_fit(const FeatureMatrix& m);  // both classes, finite, nonempty

// New matrix holding the given rows in the given order (repeats allowed).
FeatureMatrix subset_rows(const FeatureMatrix& m, std::span<const std::size_t> rows);

// Everything needed to rebuild the training-time feature encoding on new data:
// predictor order, frozen factor levels, and interaction terms.
struct EncodingRecipe {
  std::string outcome;
  std::vector<std::string> predictors;
  std::vector<InteractionSpec> interactions;
  std::map<std::string, std::vector<std::string>> factor_levels;
  std::vector<std::string> feature_names;

  json to_json() const;
  static EncodingRecipe from_json(const json& j);
};

struct EncodeResult {
  FeatureMatrix m;
  EncodingRecipe recipe;
  std::size_t dropped_rows = 0;
  std::vector<std::string> dropped_ids;
};

// Builds the recipe from the table (factor levels frozen as declared) and
// encodes it: reference coding for factors, elementwise products for
// interactions, complete-case rows only.
EncodeResult encode_for_training(const Table& t, const std::string& outcome,
                                 const std::vector<std::string>& predictors,
                                 const std::vector<InteractionSpec>& interactions);

// Re-derives the training encoding on new data. With require_outcome false the
// outcome column is neither read nor required, and y stays empty.
EncodeResult encode_with_recipe(const Table& t, const EncodingRecipe& r,
                                bool require_outcome);

}  // namespace riskkit
