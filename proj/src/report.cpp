#include "riskkit/report.hpp"

#include "riskkit/errors.hpp"
#include "riskkit/rng.hpp"

namespace riskkit {

namespace {

json interval_to_json(const IntervalEstimate& e) {
  return json{{"point", e.point},
              {"lower", e.lower},
              {"upper", e.upper},
              {"method", e.method},
              {"B", e.B},
              {"seed", e.seed},
              {"degenerate_redraws", e.degenerate_redraws},
              {"formatted", format_interval(e)}};
}

IntervalEstimate interval_from_json(const json& j) {
  IntervalEstimate e;
  e.point = j.at("point").get<double>();
  e.lower = j.at("lower").get<double>();
  e.upper = j.at("upper").get<double>();
  e.method = j.value("method", "none");
  e.B = j.value("B", 0);
  e.seed = j.value("seed", std::uint64_t{0});
  e.degenerate_redraws = j.value("degenerate_redraws", 0);
  return e;
}

}  // namespace

json curve_points_to_json(const CurvePoints& c) {
  json pts = json::array();
  for (const auto& [x, y] : c.pts) pts.push_back(json::array({x, y}));
  return json{{"label", c.label}, {"points", std::move(pts)}};
}

CurvePoints curve_points_from_json(const json& j, CurveKind kind) {
  CurvePoints c;
  c.kind = kind;
  c.label = j.value("label", "");
  for (const auto& p : j.at("points"))
    c.pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  return c;
}

EvaluationReport evaluate(const ScoredSample& pooled, const EvalOptions& opt) {
  validate_sample(pooled);
  EvaluationReport r;
  r.pooled = pooled;
  if (opt.with_cis) {
    r.auc = bootstrap_ci(MetricKind::auc, pooled, opt.bootstrap_B,
                         derive_seed(opt.bootstrap_seed, 1));
    r.ap = bootstrap_ci(MetricKind::ap, pooled, opt.bootstrap_B,
                        derive_seed(opt.bootstrap_seed, 2));
    r.brier = bootstrap_ci(MetricKind::brier, pooled, opt.bootstrap_B,
                           derive_seed(opt.bootstrap_seed, 3));
  } else {
    r.auc = {auc(pooled), 0, 0, "none", 0, 0, 0};
    r.ap = {average_precision(pooled), 0, 0, "none", 0, 0, 0};
    r.brier = {brier_score(pooled), 0, 0, "none", 0, 0, 0};
    r.auc.lower = r.auc.upper = r.auc.point;
    r.ap.lower = r.ap.upper = r.ap.point;
    r.brier.lower = r.brier.upper = r.brier.point;
  }
  r.roc = roc_curve(pooled);
  r.pr = pr_curve(pooled);
  r.calibration = calibration_curve(pooled);
  r.config_echo = json{
      {"auc_ties", "tied case/non-case pairs count half"},
      {"ap_tie_break", "tied scores ordered by ascending record index"},
      {"ap_form", "mean precision at the rank of each case"},
      {"calibration_form", "cumulative shares, risk-descending"},
  };
  if (opt.with_cis)
    r.config_echo["bootstrap"] =
        json{{"B", opt.bootstrap_B}, {"seed", opt.bootstrap_seed}};
  if (opt.extra_echo.is_object())
    for (const auto& [k, v] : opt.extra_echo.items()) r.config_echo[k] = v;
  return r;
}

json EvaluationReport::to_json() const {
  json pooled_j{{"y", json::array()}, {"scores", json::array()}};
  for (auto v : pooled.y) pooled_j["y"].push_back(static_cast<int>(v));
  for (auto v : pooled.s) pooled_j["scores"].push_back(v);
  if (!pooled.ids.empty()) pooled_j["ids"] = pooled.ids;
  return json{{"external", external},
              {"metrics", json{{"auc", interval_to_json(auc)},
                               {"ap", interval_to_json(ap)},
                               {"brier", interval_to_json(brier)}}},
              {"curves", json{{"roc", curve_points_to_json(roc)},
                              {"pr", curve_points_to_json(pr)},
                              {"calibration", curve_points_to_json(calibration)}}},
              {"config", config_echo},
              {"pooled", std::move(pooled_j)}};
}

EvaluationReport EvaluationReport::from_json(const json& j) {
  EvaluationReport r;
  r.external = j.value("external", false);
  const json& m = j.at("metrics");
  r.auc = interval_from_json(m.at("auc"));
  r.ap = interval_from_json(m.at("ap"));
  r.brier = interval_from_json(m.at("brier"));
  const json& c = j.at("curves");
  r.roc = curve_points_from_json(c.at("roc"), CurveKind::roc);
  r.pr = curve_points_from_json(c.at("pr"), CurveKind::pr);
  r.calibration = curve_points_from_json(c.at("calibration"), CurveKind::calibration);
  r.config_echo = j.value("config", json::object());
  const json& p = j.at("pooled");
  for (const auto& v : p.at("y"))
    r.pooled.y.push_back(static_cast<std::int8_t>(v.get<int>()));
  for (const auto& v : p.at("scores")) r.pooled.s.push_back(v.get<double>());
  if (p.contains("ids")) r.pooled.ids = p["ids"].get<std::vector<std::string>>();
  if (r.pooled.y.size() != r.pooled.s.size())
    throw SchemaError("pooled sample arrays misaligned");
  return r;
}

std::string curve_to_csv(const CurvePoints& curve) {
  std::string out = "x,y\n";
  for (const auto& [x, y] : curve.pts) {
    out += format_double(x);
    out += ',';
    out += format_double(y);
    out += '\n';
  }
  return out;
}

}  // namespace riskkit
