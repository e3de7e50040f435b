#pragma once

#include <cstdint>
#include <string>

#include "riskkit/metrics.hpp"
#include "riskkit/table.hpp"

namespace riskkit {

struct EvalOptions {
  int bootstrap_B = 1000;
  std::uint64_t bootstrap_seed = 0;
  bool with_cis = true;
  json extra_echo;  // caller context (folds, seeds, family) merged into the echo
};

// Everything needed to audit an assessment: point estimates with intervals,
// the three standard curves, the evaluation conventions in force, and the
// scored sample itself so every number can be recomputed from the report.
struct EvaluationReport {
  IntervalEstimate auc, ap, brier;
  CurvePoints roc, pr, calibration;
  json config_echo;
  bool external = false;
  ScoredSample pooled;

  json to_json() const;
  static EvaluationReport from_json(const json& j);
};

EvaluationReport evaluate(const ScoredSample& pooled, const EvalOptions& opt = {});

// "x,y\n" rows with shortest round-trip formatting; for curve exports.
std::string curve_to_csv(const CurvePoints& curve);

json curve_points_to_json(const CurvePoints& c);
CurvePoints curve_points_from_json(const json& j, CurveKind kind);

}  // namespace riskkit
