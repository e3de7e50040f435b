#include "riskkit/crossval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "riskkit/errors.hpp"
#include "riskkit/rng.hpp"

namespace riskkit {

FoldPlan make_folds(std::size_t n, std::size_t k, std::uint64_t seed,
                    std::span<const std::int8_t> stratify_labels) {
  if (k < 2 || k > n)
    throw ConfigError("fold count must lie in [2, " + std::to_string(n) + "], got " +
                      std::to_string(k));
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(n, 0);
  Stream stream = child_stream(seed, 0x666f6c64);  // "fold"
  if (stratify_labels.empty()) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    stream.shuffle(perm);
    for (std::size_t i = 0; i < n; ++i) plan.assignments[perm[i]] = 1 + i % k;
    return plan;
  }
  if (stratify_labels.size() != n)
    throw ShapeError("stratification labels do not match row count");
  for (auto v : stratify_labels)
    if (v != 0 && v != 1) throw LabelError("stratification labels must be 0 or 1");
  plan.stratified = true;
  // one continuing counter across both classes: per-class and total fold
  // sizes each differ by at most one
  std::size_t counter = 0;
  for (int cls : {1, 0}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (stratify_labels[i] == cls) idx.push_back(i);
    stream.shuffle(idx);
    for (std::size_t i : idx) plan.assignments[i] = 1 + counter++ % k;
  }
  return plan;
}

std::string fold_assignments_csv(const FoldPlan& plan, std::span<const std::string> ids) {
  if (!ids.empty() && ids.size() != plan.assignments.size())
    throw ShapeError("id list does not match fold plan length");
  std::string out = "id,fold\n";
  for (std::size_t i = 0; i < plan.assignments.size(); ++i) {
    out += ids.empty() ? "row" + std::to_string(i + 1) : ids[i];
    out += ',';
    out += std::to_string(plan.assignments[i]);
    out += '\n';
  }
  return out;
}

static void validate_plan(const FoldPlan& plan, std::size_t n) {
  if (plan.assignments.size() != n)
    throw ShapeError("fold plan does not cover the matrix rows");
  for (std::size_t f : plan.assignments)
    if (f < 1 || f > plan.k) throw ConfigError("fold id outside 1..k");
}

CvResult cross_validate(const Learner& learner, const FeatureMatrix& m,
                        const FoldPlan& plan, const EvalOptions& eval) {
  validate_for_fit(m);
  validate_plan(plan, m.n);
  CvResult res;
  res.pooled.y = m.y;
  res.pooled.s.assign(m.n, 0.0);
  res.pooled.ids = m.record_ids;
  std::vector<std::uint8_t> scored(m.n, 0);
  for (std::size_t f = 1; f <= plan.k; ++f) {
    std::vector<std::size_t> train, held;
    for (std::size_t i = 0; i < m.n; ++i)
      (plan.assignments[i] == f ? held : train).push_back(i);
    if (held.empty()) continue;
    std::size_t cases = 0;
    for (std::size_t i : train) cases += m.y[i] == 1;
    if (cases == 0 || cases == train.size())
      throw StratificationError("fold " + std::to_string(f) +
                                " training part is single-class; use stratified folds");
    auto model = learner(subset_rows(m, train), derive_seed(plan.seed, f));
    for (std::size_t i : held) {
      res.pooled.s[i] = model->predict_risk(m.row(i));
      scored[i] = 1;
    }
    res.folds.push_back({f, train.size(), held.size(), cases});
  }
  for (std::size_t i = 0; i < m.n; ++i)
    if (!scored[i]) throw StateError("row " + std::to_string(i) + " never held out");
  EvalOptions opts = eval;
  if (!opts.extra_echo.is_object()) opts.extra_echo = json::object();
  opts.extra_echo["cv"] = json{{"k", plan.k},
                               {"seed", plan.seed},
                               {"stratified", plan.stratified}};
  res.report = evaluate(res.pooled, opts);
  return res;
}

json CvResult::to_json() const {
  json folds_j = json::array();
  for (const auto& f : folds)
    folds_j.push_back(json{{"fold", f.fold},
                           {"train_rows", f.train_rows},
                           {"held_out", f.held_out},
                           {"train_cases", f.train_cases}});
  return json{{"folds", std::move(folds_j)}, {"report", report.to_json()}};
}

std::vector<json> default_svm_grid(std::size_t k) {
  if (k == 0) throw ConfigError("feature count must be positive");
  const double cs[] = {0.1, 1.0, 10.0};
  const double g1 = 1.0 / static_cast<double>(k);
  std::vector<json> grid;
  for (double c : cs) {
    json cell;
    cell["kernel"] = json{{"kind", "linear"}};
    cell["c"] = c;
    grid.push_back(std::move(cell));
  }
  for (double c : cs)
    for (double g : {0.5 * g1, g1, 2.0 * g1}) {
      json cell;
      cell["kernel"] = json{{"kind", "gaussian"}, {"gamma", g}};
      cell["c"] = c;
      grid.push_back(std::move(cell));
    }
  for (double c : cs)
    for (int d : {2, 3}) {
      json cell;
      cell["kernel"] =
          json{{"kind", "polynomial"}, {"degree", d}, {"gamma", g1}, {"coef0", 1.0}};
      cell["c"] = c;
      grid.push_back(std::move(cell));
    }
  return grid;
}

std::vector<json> default_forest_grid(std::size_t k) {
  if (k == 0) throw ConfigError("feature count must be positive");
  auto sq = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(k))));
  std::vector<std::size_t> mtries;
  for (std::size_t v : {std::size_t{1}, sq, k})
    if (std::find(mtries.begin(), mtries.end(), v) == mtries.end()) mtries.push_back(v);
  std::vector<json> grid;
  for (std::size_t trees : {100, 300, 500})
    for (std::size_t mtry : mtries)
      for (std::size_t node : {5, 10, 20})
        grid.push_back(json{{"n_trees", trees}, {"mtry", mtry}, {"node_size", node}});
  return grid;
}

namespace {

double metric_point(MetricKind kind, const EvaluationReport& r) {
  switch (kind) {
    case MetricKind::auc: return r.auc.point;
    case MetricKind::ap: return r.ap.point;
    case MetricKind::brier: break;
  }
  throw ConfigError("selection metric must be auc or ap");
}

}  // namespace

GridResult grid_search(const SearchGrid& grid, const FeatureMatrix& m,
                       const FoldPlan& plan) {
  metric_point(grid.metric, EvaluationReport{});  // reject brier up front
  std::vector<json> combos = grid.combinations;
  if (combos.empty()) combos.push_back(json::object());
  GridResult res;
  res.family = grid.family;
  res.metric_kind = grid.metric;
  EvalOptions opts;
  opts.with_cis = false;  // leaderboards carry point estimates only
  std::exception_ptr first_failure;
  for (const json& hyper : combos) {
    GridCell cell;
    cell.hyper = hyper;
    try {
      Learner learner = make_learner(grid.family, hyper);
      CvResult cv = cross_validate(learner, m, plan, opts);
      cell.auc = cv.report.auc.point;
      cell.ap = cv.report.ap.point;
      cell.brier = cv.report.brier.point;
      cell.metric = metric_point(grid.metric, cv.report);
      cell.ok = true;
    } catch (const Error& e) {
      cell.error = e.what();
      if (!first_failure) first_failure = std::current_exception();
    }
    res.cells.push_back(std::move(cell));
  }
  std::vector<std::size_t> ok, failed;
  for (std::size_t i = 0; i < res.cells.size(); ++i)
    (res.cells[i].ok ? ok : failed).push_back(i);
  if (ok.empty()) std::rethrow_exception(first_failure);
  std::stable_sort(ok.begin(), ok.end(), [&](std::size_t a, std::size_t b) {
    return res.cells[a].metric > res.cells[b].metric;  // stable: earlier cell wins ties
  });
  res.best_index = ok.front();
  res.ranking = std::move(ok);
  res.ranking.insert(res.ranking.end(), failed.begin(), failed.end());
  return res;
}

json GridResult::to_json() const {
  json cells_j = json::array();
  for (const auto& c : cells) {
    json row{{"hyper", c.hyper}, {"ok", c.ok}};
    if (c.ok) {
      row["metric"] = c.metric;
      row["auc"] = c.auc;
      row["ap"] = c.ap;
      row["brier"] = c.brier;
    } else {
      row["error"] = c.error;
    }
    cells_j.push_back(std::move(row));
  }
  return json{{"family", family},
              {"metric", metric_name(metric_kind)},
              {"cells", std::move(cells_j)},
              {"ranking", ranking},
              {"best_index", best_index},
              {"best", cells[best_index].hyper}};
}

std::string PredictorSet::describe() const {
  std::string out;
  for (const auto& p : predictors) {
    if (!out.empty()) out += " + ";
    out += p;
  }
  for (const auto& i : interactions) out += " + " + i.a + "*" + i.b;
  return out;
}

std::vector<PredictorSet> enumerate_candidates(
    const std::vector<std::string>& base, const std::vector<InteractionSpec>& interactions,
    bool allow_large) {
  if (base.empty()) throw ConfigError("no base predictors to enumerate");
  for (std::size_t i = 0; i < base.size(); ++i)
    for (std::size_t j = i + 1; j < base.size(); ++j)
      if (base[i] == base[j]) throw ConfigError("duplicate base predictor '" + base[i] + "'");
  for (const auto& spec : interactions) {
    auto has = [&](const std::string& n) {
      return std::find(base.begin(), base.end(), n) != base.end();
    };
    if (!has(spec.a) || !has(spec.b))
      throw ConfigError("interaction " + spec.a + "*" + spec.b +
                        " references a predictor outside the base list");
  }
  std::size_t limit = allow_large ? 20 : 12;
  if (base.size() > limit)
    throw ConfigError("enumerating " + std::to_string(base.size()) +
                      " predictors needs " +
                      std::to_string((std::size_t{1} << base.size()) - 1) +
                      " subsets; pass the override to allow more than 4095");
  std::vector<PredictorSet> out;
  std::size_t total = (std::size_t{1} << base.size()) - 1;
  for (std::size_t mask = 1; mask <= total; ++mask) {
    PredictorSet cand;
    for (std::size_t j = 0; j < base.size(); ++j)
      if (mask & (std::size_t{1} << j)) cand.predictors.push_back(base[j]);
    for (const auto& spec : interactions) {
      auto in = [&](const std::string& n) {
        return std::find(cand.predictors.begin(), cand.predictors.end(), n) !=
               cand.predictors.end();
      };
      if (in(spec.a) && in(spec.b)) cand.interactions.push_back(spec);
    }
    out.push_back(std::move(cand));
  }
  return out;
}

ScreenResult screen_predictors(const std::vector<PredictorSet>& candidates,
                               const Learner& learner, const Table& t,
                               const std::string& outcome, std::size_t k,
                               std::uint64_t seed, MetricKind metric) {
  if (candidates.empty()) throw ConfigError("no candidate predictor sets");
  metric_point(metric, EvaluationReport{});  // reject brier up front
  std::vector<std::string> pool;             // union of predictors, insertion order
  for (const auto& cand : candidates) {
    for (const auto& spec : cand.interactions) {
      auto in = [&](const std::string& n) {
        return std::find(cand.predictors.begin(), cand.predictors.end(), n) !=
               cand.predictors.end();
      };
      if (!in(spec.a) || !in(spec.b))
        throw ConfigError("candidate '" + cand.describe() + "' includes interaction " +
                          spec.a + "*" + spec.b + " without both main effects");
    }
    for (const auto& p : cand.predictors)
      if (std::find(pool.begin(), pool.end(), p) == pool.end()) pool.push_back(p);
  }
  // one shared complete-case row set so every candidate gets the same folds
  std::vector<const Column*> needed{&t.col(outcome)};
  for (const auto& p : pool) needed.push_back(&t.col(p));
  std::vector<std::uint8_t> keep(t.row_count, 1);
  for (const Column* c : needed)
    for (std::size_t i = 0; i < t.row_count; ++i)
      if (c->is_missing(i)) keep[i] = 0;
  Table shared = filter_rows(t, keep);
  const Column& yc = shared.col(outcome);
  if (yc.kind != ColumnKind::numeric)
    throw LabelError("outcome column '" + outcome + "' must be numeric 0/1");
  std::vector<std::int8_t> y(shared.row_count);
  for (std::size_t i = 0; i < shared.row_count; ++i) {
    if (yc.num[i] != 0.0 && yc.num[i] != 1.0)
      throw LabelError("outcome column '" + outcome + "' must be numeric 0/1");
    y[i] = static_cast<std::int8_t>(yc.num[i]);
  }
  ScreenResult res;
  res.metric_kind = metric;
  res.rows_used = shared.row_count;
  res.plan = make_folds(shared.row_count, k, seed, y);
  EvalOptions opts;
  opts.with_cis = false;
  std::exception_ptr first_failure;
  for (const auto& cand : candidates) {
    ScreenRow row;
    row.candidate = cand;
    try {
      EncodeResult enc = encode_for_training(shared, outcome, cand.predictors,
                                             cand.interactions);
      if (enc.dropped_rows != 0)
        throw StateError("shared complete-case filter missed rows");
      row.n_features = enc.m.k;
      CvResult cv = cross_validate(learner, enc.m, res.plan, opts);
      row.auc = cv.report.auc.point;
      row.ap = cv.report.ap.point;
      row.brier = cv.report.brier.point;
      row.metric = metric_point(metric, cv.report);
      row.ok = true;
    } catch (const Error& e) {
      row.error = e.what();
      if (!first_failure) first_failure = std::current_exception();
    }
    res.leaderboard.push_back(std::move(row));
  }
  bool any_ok = std::any_of(res.leaderboard.begin(), res.leaderboard.end(),
                            [](const ScreenRow& r) { return r.ok; });
  if (!any_ok) std::rethrow_exception(first_failure);
  std::stable_sort(res.leaderboard.begin(), res.leaderboard.end(),
                   [](const ScreenRow& a, const ScreenRow& b) {
                     if (a.ok != b.ok) return a.ok;  // failures sink
                     return a.metric > b.metric;
                   });
  return res;
}

json ScreenResult::to_json() const {
  json rows = json::array();
  for (const auto& r : leaderboard) {
    json row{{"candidate", r.candidate.describe()}, {"ok", r.ok}};
    if (r.ok) {
      row["metric"] = r.metric;
      row["auc"] = r.auc;
      row["ap"] = r.ap;
      row["brier"] = r.brier;
      row["n_features"] = r.n_features;
    } else {
      row["error"] = r.error;
    }
    rows.push_back(std::move(row));
  }
  return json{{"metric", metric_name(metric_kind)},
              {"rows_used", rows_used},
              {"k", plan.k},
              {"seed", plan.seed},
              {"leaderboard", std::move(rows)}};
}

StratifiedPdp partial_dependence(const RiskModel& model, const FeatureMatrix& m,
                                 const std::string& vary, const std::string& strata,
                                 std::size_t grid_points) {
  if (grid_points < 2) throw ConfigError("pdp needs at least 2 grid points");
  if (vary == strata) throw ConfigError("vary and strata must be different features");
  std::size_t vi = m.feature_index(vary);
  std::size_t si = m.feature_index(strata);
  if (m.n == 0) throw ShapeError("empty feature matrix");
  for (std::size_t i = 0; i < m.n; ++i) {
    double v = m.at(i, si);
    if (v != 0.0 && v != 1.0)
      throw ConfigError("strata feature '" + strata + "' is not 0/1 coded");
  }
  // reference row: feature-wise medians
  std::vector<double> ref(m.k);
  std::vector<double> colv(m.n);
  for (std::size_t j = 0; j < m.k; ++j) {
    for (std::size_t i = 0; i < m.n; ++i) colv[i] = m.at(i, j);
    std::sort(colv.begin(), colv.end());
    ref[j] = m.n % 2 ? colv[m.n / 2] : 0.5 * (colv[m.n / 2 - 1] + colv[m.n / 2]);
  }
  // product features get recomputed from their (possibly overridden) parents
  struct Product {
    std::size_t self, a, b;
  };
  std::vector<Product> products;
  for (std::size_t j = 0; j < m.k; ++j) {
    const std::string& name = m.feature_names[j];
    auto star = name.find('*');
    if (star == std::string::npos) continue;
    std::string a = name.substr(0, star), b = name.substr(star + 1);
    bool have_a = std::find(m.feature_names.begin(), m.feature_names.end(), a) !=
                  m.feature_names.end();
    bool have_b = std::find(m.feature_names.begin(), m.feature_names.end(), b) !=
                  m.feature_names.end();
    if (have_a && have_b) products.push_back({j, m.feature_index(a), m.feature_index(b)});
  }
  double lo = m.at(0, vi), hi = lo;
  for (std::size_t i = 1; i < m.n; ++i) {
    lo = std::min(lo, m.at(i, vi));
    hi = std::max(hi, m.at(i, vi));
  }
  StratifiedPdp out;
  out.vary = vary;
  out.strata = strata;
  for (int sv : {0, 1}) {
    CurvePoints curve;
    curve.kind = CurveKind::pdp;
    curve.label = strata + "=" + std::to_string(sv);
    std::vector<double> row = ref;
    row[si] = sv;
    for (std::size_t g = 0; g < grid_points; ++g) {
      double x = lo + (hi - lo) * static_cast<double>(g) /
                          static_cast<double>(grid_points - 1);
      row[vi] = x;
      for (const auto& p : products) row[p.self] = row[p.a] * row[p.b];
      curve.pts.emplace_back(x, model.predict_risk(row));
    }
    (sv == 0 ? out.stratum0 : out.stratum1) = std::move(curve);
  }
  return out;
}

}  // namespace riskkit
