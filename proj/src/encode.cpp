#include "riskkit/encode.hpp"

#include <algorithm>
#include <cmath>

#include "riskkit/errors.hpp"

namespace riskkit {

InteractionSpec parse_interaction(const std::string& text) {
  auto pos = text.find('*');
  if (pos == std::string::npos || pos == 0 || pos + 1 >= text.size() ||
      text.find('*', pos + 1) != std::string::npos)
    throw ConfigError("interaction '" + text + "' must have the form a*b");
  return {text.substr(0, pos), text.substr(pos + 1)};
}

std::size_t FeatureMatrix::feature_index(const std::string& name) const {
  auto it = std::find(feature_names.begin(), feature_names.end(), name);
  if (it == feature_names.end()) throw SchemaError("no feature named '" + name + "'");
  return static_cast<std::size_t>(it - feature_names.begin());
}

void validate_for_fit(const FeatureMatrix& m) {
  if (m.n == 0 || m.k == 0) throw ShapeError("empty feature matrix");
  if (m.y.size() != m.n) throw ShapeError("label vector length mismatch");
  bool has0 = false, has1 = false;
  for (auto v : m.y) {
    if (v == 0) has0 = true;
    else if (v == 1) has1 = true;
    else throw LabelError("labels must be 0 or 1");
  }
  if (!has0 || !has1) throw LabelError("fitting needs both classes present");
  for (double v : m.x)
    if (!std::isfinite(v)) throw NumericError("non-finite feature value");
}

FeatureMatrix subset_rows(const FeatureMatrix& m, std::span<const std::size_t> rows) {
  FeatureMatrix out;
  out.feature_names = m.feature_names;
  out.n = rows.size();
  out.k = m.k;
  out.x.reserve(rows.size() * m.k);
  for (std::size_t r : rows) {
    if (r >= m.n) throw ShapeError("row index out of range");
    auto src = m.row(r);
    out.x.insert(out.x.end(), src.begin(), src.end());
    if (!m.y.empty()) out.y.push_back(m.y[r]);
    if (!m.record_ids.empty()) out.record_ids.push_back(m.record_ids[r]);
  }
  return out;
}

json EncodingRecipe::to_json() const {
  json inter = json::array();
  for (const auto& i : interactions) inter.push_back(i.a + "*" + i.b);
  json levels = json::object();
  for (const auto& [col, lv] : factor_levels) levels[col] = lv;
  return json{{"outcome", outcome},
              {"predictors", predictors},
              {"interactions", std::move(inter)},
              {"factor_levels", std::move(levels)},
              {"feature_names", feature_names}};
}

EncodingRecipe EncodingRecipe::from_json(const json& j) {
  EncodingRecipe r;
  r.outcome = j.at("outcome").get<std::string>();
  r.predictors = j.at("predictors").get<std::vector<std::string>>();
  for (const auto& s : j.at("interactions"))
    r.interactions.push_back(parse_interaction(s.get<std::string>()));
  for (const auto& [col, lv] : j.at("factor_levels").items())
    r.factor_levels[col] = lv.get<std::vector<std::string>>();
  r.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  return r;
}

namespace {

struct EncodedPredictor {
  std::vector<std::string> names;               // one per encoded column
  std::vector<std::vector<double>> columns;     // aligned with names
};

// Encodes one predictor over the kept rows. Factors use reference coding
// against the first recipe level; a label outside the recipe's level list is
// the external-validation failure mode and must name itself.
EncodedPredictor encode_predictor(const Column& c, const EncodingRecipe& recipe,
                                  const std::vector<std::size_t>& rows) {
  EncodedPredictor out;
  auto lv_it = recipe.factor_levels.find(c.name);
  if (lv_it == recipe.factor_levels.end()) {
    if (c.kind != ColumnKind::numeric)
      throw SchemaError("predictor '" + c.name + "' must be numeric here");
    out.names.push_back(c.name);
    std::vector<double> v;
    v.reserve(rows.size());
    for (auto r : rows) v.push_back(c.num[r]);
    out.columns.push_back(std::move(v));
    return out;
  }
  if (c.kind != ColumnKind::factor)
    throw SchemaError("predictor '" + c.name + "' must be a factor here");
  const auto& levels = lv_it->second;
  std::vector<std::size_t> mapped;
  mapped.reserve(rows.size());
  for (auto r : rows) {
    const std::string& label = c.levels[static_cast<std::size_t>(c.code[r])];
    auto it = std::find(levels.begin(), levels.end(), label);
    if (it == levels.end())
      throw EncodingError("factor '" + c.name + "' has level '" + label +
                          "' unseen at training time");
    mapped.push_back(static_cast<std::size_t>(it - levels.begin()));
  }
  for (std::size_t l = 1; l < levels.size(); ++l) {
    out.names.push_back(c.name + "=" + levels[l]);
    std::vector<double> v;
    v.reserve(rows.size());
    for (auto m : mapped) v.push_back(m == l ? 1.0 : 0.0);
    out.columns.push_back(std::move(v));
  }
  return out;
}

EncodeResult encode_core(const Table& t, const EncodingRecipe& recipe,
                         bool require_outcome) {
  for (const auto& p : recipe.predictors) t.col(p);
  if (require_outcome) t.col(recipe.outcome);

  // complete cases over the columns this encoding will read
  std::vector<const Column*> needed;
  for (const auto& p : recipe.predictors) needed.push_back(&t.col(p));
  if (require_outcome) needed.push_back(&t.col(recipe.outcome));

  EncodeResult out;
  out.recipe = recipe;
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < t.row_count; ++r) {
    bool complete = true;
    for (const Column* c : needed)
      if (c->is_missing(r)) { complete = false; break; }
    if (complete) rows.push_back(r);
    else out.dropped_ids.push_back(t.record_id(r));
  }
  out.dropped_rows = out.dropped_ids.size();

  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // per predictor: [begin, end)
  for (const auto& p : recipe.predictors) {
    auto enc = encode_predictor(t.col(p), recipe, rows);
    std::size_t begin = cols.size();
    for (std::size_t i = 0; i < enc.names.size(); ++i) {
      names.push_back(std::move(enc.names[i]));
      cols.push_back(std::move(enc.columns[i]));
    }
    spans.emplace_back(begin, cols.size());
  }

  auto predictor_span = [&](const std::string& name) {
    auto it = std::find(recipe.predictors.begin(), recipe.predictors.end(), name);
    if (it == recipe.predictors.end())
      throw ConfigError("interaction parent '" + name +
                        "' is not among the selected predictors");
    return spans[static_cast<std::size_t>(it - recipe.predictors.begin())];
  };
  for (const auto& inter : recipe.interactions) {
    auto [a0, a1] = predictor_span(inter.a);
    auto [b0, b1] = predictor_span(inter.b);
    for (std::size_t ai = a0; ai < a1; ++ai) {
      for (std::size_t bi = b0; bi < b1; ++bi) {
        std::vector<double> v(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) v[r] = cols[ai][r] * cols[bi][r];
        names.push_back(names[ai] + "*" + names[bi]);
        cols.push_back(std::move(v));
      }
    }
  }

  FeatureMatrix& m = out.m;
  m.feature_names = std::move(names);
  m.n = rows.size();
  m.k = cols.size();
  m.x.resize(m.n * m.k);
  for (std::size_t j = 0; j < m.k; ++j)
    for (std::size_t i = 0; i < m.n; ++i) m.at(i, j) = cols[j][i];
  for (auto r : rows) m.record_ids.push_back(t.record_id(r));

  if (require_outcome) {
    const Column& oc = t.col(recipe.outcome);
    if (oc.kind != ColumnKind::numeric)
      throw LabelError("outcome '" + recipe.outcome + "' must be a numeric 0/1 column");
    for (auto r : rows) {
      double v = oc.num[r];
      if (v != 0.0 && v != 1.0)
        throw LabelError("outcome '" + recipe.outcome + "' has value " +
                         std::to_string(v) + " outside {0,1}");
      m.y.push_back(static_cast<std::int8_t>(v));
    }
  }
  return out;
}

}  // namespace

EncodeResult encode_for_training(const Table& t, const std::string& outcome,
                                 const std::vector<std::string>& predictors,
                                 const std::vector<InteractionSpec>& interactions) {
  if (predictors.empty()) throw ConfigError("no predictors selected");
  EncodingRecipe recipe;
  recipe.outcome = outcome;
  recipe.predictors = predictors;
  recipe.interactions = interactions;
  for (const auto& p : predictors) {
    const Column& c = t.col(p);
    if (c.kind == ColumnKind::factor) recipe.factor_levels[p] = c.levels;
    else if (c.kind != ColumnKind::numeric)
      throw SchemaError("predictor '" + p + "' is " + to_string(c.kind) +
                        "; only numeric and factor columns can be predictors");
  }
  auto out = encode_core(t, recipe, true);
  out.recipe.feature_names = out.m.feature_names;
  return out;
}

EncodeResult encode_with_recipe(const Table& t, const EncodingRecipe& r,
                                bool require_outcome) {
  auto out = encode_core(t, r, require_outcome);
  if (out.m.feature_names != r.feature_names)
    throw EncodingError("re-derived feature columns do not match the recipe");
  return out;
}

}  // namespace riskkit
