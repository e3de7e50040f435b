#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "riskkit/model.hpp"
#include "riskkit/report.hpp"

namespace riskkit {

// A reproducible partition of row indices into k folds (ids 1..k).
struct FoldPlan {
  std::size_t k = 10;
  std::vector<std::size_t> assignments;  // fold id per row
  std::uint64_t seed = 0;
  bool stratified = false;

  std::size_t size() const { return assignments.size(); }
};

// Seeded shuffle then round-robin. With stratify_labels, cases and non-cases
// are dealt onto a single continuing counter so per-class AND total fold
// sizes each differ by at most one.
FoldPlan make_folds(std::size_t n, std::size_t k, std::uint64_t seed,
                    std::span<const std::int8_t> stratify_labels = {});

// "id,fold" rows for audit exports; ids empty -> row1, row2, ...
std::string fold_assignments_csv(const FoldPlan& plan,
                                 std::span<const std::string> ids = {});

struct FoldSummary {
  std::size_t fold = 0;
  std::size_t train_rows = 0, held_out = 0, train_cases = 0;
};

struct CvResult {
  ScoredSample pooled;  // one out-of-fold score per row, original order
  std::vector<FoldSummary> folds;
  EvaluationReport report;

  json to_json() const;
};

// Fits on k-1 parts, scores the held-out part, pools. Per-fold seeds are
// derived from the plan seed so results are schedule-independent.
CvResult cross_validate(const Learner& learner, const FeatureMatrix& m,
                        const FoldPlan& plan, const EvalOptions& eval = {});

struct SearchGrid {
  std::string family;
  std::vector<json> combinations;  // empty -> one default-hyper cell
  MetricKind metric = MetricKind::ap;
};

// linear C x3, gaussian C x gamma 3x3, polynomial C x degree 3x2 (18 cells).
std::vector<json> default_svm_grid(std::size_t k);
// n_trees x mtry x node_size, 3 values each (duplicate mtry values collapsed).
std::vector<json> default_forest_grid(std::size_t k);

struct GridCell {
  json hyper;
  bool ok = false;
  double metric = 0, auc = 0, ap = 0, brier = 0;
  std::string error;  // failure description when !ok
};

struct GridResult {
  std::string family;
  MetricKind metric_kind = MetricKind::ap;
  std::vector<GridCell> cells;       // grid order
  std::vector<std::size_t> ranking;  // cell indices best-first; failures last
  std::size_t best_index = 0;

  json to_json() const;
};

// Every combination cross-validated with the same plan; ties keep the earlier
// grid entry. Per-cell fit failures are recorded; only all-fail is fatal.
GridResult grid_search(const SearchGrid& grid, const FeatureMatrix& m,
                       const FoldPlan& plan);

struct PredictorSet {
  std::vector<std::string> predictors;
  std::vector<InteractionSpec> interactions;

  std::string describe() const;  // "a + b + a*b"
};

// All non-empty subsets of base, each with the declared interactions whose
// parents are both present. Refuses > 4095 subsets unless allow_large.
std::vector<PredictorSet> enumerate_candidates(
    const std::vector<std::string>& base,
    const std::vector<InteractionSpec>& interactions, bool allow_large = false);

struct ScreenRow {
  PredictorSet candidate;
  bool ok = false;
  double metric = 0, auc = 0, ap = 0, brier = 0;
  std::size_t n_features = 0;
  std::string error;
};

struct ScreenResult {
  MetricKind metric_kind = MetricKind::ap;
  std::vector<ScreenRow> leaderboard;  // metric descending, stable
  std::size_t rows_used = 0;           // shared complete-case count
  FoldPlan plan;

  json to_json() const;
};

// Restricts the table to rows complete on the outcome and every predictor any
// candidate uses, builds one stratified plan there, then cross-validates each
// candidate's encoding with it -- every candidate sees identical folds.
ScreenResult screen_predictors(const std::vector<PredictorSet>& candidates,
                               const Learner& learner, const Table& t,
                               const std::string& outcome, std::size_t k,
                               std::uint64_t seed,
                               MetricKind metric = MetricKind::ap);

struct StratifiedPdp {
  std::string vary, strata;
  CurvePoints stratum0, stratum1;  // kind pdp; x = vary value, y = risk
};

// Risk against `vary` over its observed range at each stratum value, all
// other features held at their column medians; product features (name
// "a*b") are recomputed from the overridden parents.
StratifiedPdp partial_dependence(const RiskModel& model, const FeatureMatrix& m,
                                 const std::string& vary,
                                 const std::string& strata,
                                 std::size_t grid_points = 25);

}  // namespace riskkit
