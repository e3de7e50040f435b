#include "riskkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "riskkit/errors.hpp"
#include "riskkit/rng.hpp"

namespace riskkit {

json GeneratorSpec::to_json() const {
  json feats = json::array();
  for (const auto& f : features) {
    json e{{"name", f.name}, {"coef", f.coef}};
    if (f.binary) {
      e["kind"] = "binary";
      e["prevalence"] = f.prevalence;
      if (f.emit_as_factor) e["as_factor"] = true;
    } else {
      e["kind"] = "numeric";
      e["lo"] = f.lo;
      e["hi"] = f.hi;
    }
    feats.push_back(std::move(e));
  }
  json inter = json::array();
  for (const auto& i : interactions)
    inter.push_back(json{{"a", i.a}, {"b", i.b}, {"coef", i.coef}});
  return json{{"n", n},
              {"seed", seed},
              {"intercept", intercept},
              {"features", std::move(feats)},
              {"interactions", std::move(inter)},
              {"outcome_name", outcome_name},
              {"id_prefix", id_prefix}};
}

GeneratorSpec GeneratorSpec::from_json(const json& j) {
  GeneratorSpec s;
  s.n = j.at("n").get<std::size_t>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.intercept = j.at("intercept").get<double>();
  s.outcome_name = j.value("outcome_name", "outcome");
  s.id_prefix = j.value("id_prefix", "R");
  for (const auto& e : j.at("features")) {
    SynthFeature f;
    f.name = e.at("name").get<std::string>();
    f.coef = e.value("coef", 0.0);
    std::string kind = e.at("kind").get<std::string>();
    if (kind == "binary") {
      f.binary = true;
      f.prevalence = e.at("prevalence").get<double>();
      f.emit_as_factor = e.value("as_factor", false);
      if (f.prevalence <= 0 || f.prevalence >= 1)
        throw SpecError("feature '" + f.name + "': prevalence must be inside (0,1)");
    } else if (kind == "numeric") {
      f.lo = e.at("lo").get<double>();
      f.hi = e.at("hi").get<double>();
      if (!(f.lo < f.hi))
        throw SpecError("feature '" + f.name + "': needs lo < hi");
    } else {
      throw SpecError("feature '" + f.name + "': unknown kind '" + kind + "'");
    }
    s.features.push_back(std::move(f));
  }
  if (j.contains("interactions")) {
    for (const auto& e : j["interactions"]) {
      SynthInteraction i;
      i.a = e.at("a").get<std::string>();
      i.b = e.at("b").get<std::string>();
      i.coef = e.at("coef").get<double>();
      s.interactions.push_back(std::move(i));
    }
  }
  return s;
}

GeneratorSpec GeneratorSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open generator spec '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SpecError(std::string("generator spec is not valid JSON: ") + e.what());
  }
  return from_json(j);
}

SynthResult generate(const GeneratorSpec& spec) {
  if (spec.n == 0) throw SpecError("generator needs n > 0");
  if (spec.features.empty()) throw SpecError("generator needs at least one feature");
  {
    std::vector<std::string> names;
    for (const auto& f : spec.features) names.push_back(f.name);
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end())
      throw SpecError("duplicate feature name in generator spec");
  }
  auto feature_index = [&](const std::string& name) {
    for (std::size_t i = 0; i < spec.features.size(); ++i)
      if (spec.features[i].name == name) return i;
    throw SpecError("interaction references unknown feature '" + name + "'");
  };
  std::vector<std::pair<std::size_t, std::size_t>> inter_idx;
  for (const auto& i : spec.interactions)
    inter_idx.emplace_back(feature_index(i.a), feature_index(i.b));

  const std::size_t n = spec.n, kf = spec.features.size();
  std::vector<std::vector<double>>vals(kf, std::vector<double>(n));
  for (std::size_t j = 0; j < kf; ++j) {
    Stream stream = child_stream(spec.seed, j);
    const SynthFeature& f = spec.features[j];
    for (std::size_t i = 0; i < n; ++i) {
      if (f.binary) vals[j][i] = stream.next_bernoulli(f.prevalence) ? 1.0 : 0.0;
      else vals[j][i] = f.lo + (f.hi - f.lo) * stream.next_double();
    }
  }

  SynthResult out;
  out.true_risk.resize(n);
  std::vector<std::int8_t> labels(n);
  Stream label_stream = child_stream(spec.seed, kf);
  for (std::size_t i = 0; i < n; ++i) {
    double lp = spec.intercept;
    for (std::size_t j = 0; j < kf; ++j) lp += spec.features[j].coef * vals[j][i];
    for (std::size_t t = 0; t < inter_idx.size(); ++t)
      lp += spec.interactions[t].coef * vals[inter_idx[t].first][i] * vals[inter_idx[t].second][i];
    double risk = 1.0 / (1.0 + std::exp(-lp));
    out.true_risk[i] = risk;
    labels[i] = label_stream.next_bernoulli(risk) ? 1 : 0;
  }
  bool any0 = false, any1 = false;
  for (auto l : labels) (l ? any1 : any0) = true;
  if (!any0 || !any1)
    throw SpecError("generated cohort is single-class; the spec is degenerate at n=" +
                    std::to_string(n));

  // assemble table + dictionary
  Table& t = out.table;
  t.name = "synthetic";
  t.row_count = n;
  t.primary_key = "id";

  DictEntry ide{"id", ColumnKind::identifier, "", {}, "record identifier"};
  out.dict.entries.push_back(ide);
  out.dict.primary_key = "id";

  Column idc;
  idc.name = "id";
  idc.kind = ColumnKind::identifier;
  idc.missing.assign(n, 0);
  std::size_t width = std::to_string(n).size();
  for (std::size_t i = 0; i < n; ++i) {
    std::string num = std::to_string(i + 1);
    idc.text.push_back(spec.id_prefix + std::string(width - num.size(), '0') + num);
  }
  t.columns.push_back(std::move(idc));

  for (std::size_t j = 0; j < kf; ++j) {
    const SynthFeature& f = spec.features[j];
    Column c;
    c.name = f.name;
    c.missing.assign(n, 0);
    if (f.binary && f.emit_as_factor) {
      c.kind = ColumnKind::factor;
      c.levels = {"No", "Yes"};
      for (std::size_t i = 0; i < n; ++i)
        c.code.push_back(vals[j][i] == 1.0 ? 1 : 0);
      out.dict.entries.push_back({f.name, ColumnKind::factor, "", {"No", "Yes"}, ""});
    } else {
      c.kind = ColumnKind::numeric;
      c.num = vals[j];
      out.dict.entries.push_back({f.name, ColumnKind::numeric, "", {}, ""});
    }
    t.columns.push_back(std::move(c));
  }

  Column oc;
  oc.name = spec.outcome_name;
  oc.kind = ColumnKind::numeric;
  oc.missing.assign(n, 0);
  for (auto l : labels) oc.num.push_back(static_cast<double>(l));
  t.columns.push_back(std::move(oc));
  out.dict.entries.push_back({spec.outcome_name, ColumnKind::numeric, "", {}, "binary outcome"});

  return out;
}

}  // namespace riskkit
