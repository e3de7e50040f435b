#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace riskkit {

// Observed binary outcomes paired with predicted risk scores.
struct ScoredSample {
  std::vector<std::int8_t> y;    // 0 = non-case, 1 = case
  std::vector<double> s;         // finite risk scores
  std::vector<std::string> ids;  // optional; empty or same length as y

  std::size_t size() const { return y.size(); }
  std::size_t case_count() const;
  std::size_t noncase_count() const { return size() - case_count(); }
};

// Throws ShapeError / NumericError / LabelError on malformed samples.
void validate_sample(const ScoredSample& sample);

enum class CurveKind { roc, pr, calibration, pdp };

struct CurvePoints {
  CurveKind kind = CurveKind::roc;
  std::string label;  // series label for plotting; optional
  std::vector<std::pair<double, double>> pts;
};

struct IntervalEstimate {
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::string method;  // "percentile bootstrap" or "none"
  int B = 0;
  std::uint64_t seed = 0;
  int degenerate_redraws = 0;
};

enum class MetricKind { auc, ap, brier };

std::string metric_name(MetricKind m);

// Probability that a random case outscores a random non-case, ties counted
// half. Rank-based O(n log n); numerator kept integral so the result is
// bit-identical to pairwise enumeration.
double auc(const ScoredSample& sample);

// One point per distinct threshold, descending, plus the (0,0) endpoint.
// x = false positive rate, y = true positive rate.
CurvePoints roc_curve(const ScoredSample& sample);

// Mean of precision at the rank of each case, scores descending. Tied scores
// are ordered by ascending record index (recorded in report metadata).
double average_precision(const ScoredSample& sample);

// (recall, precision) at each distinct threshold, descending. Step semantics:
// consumers must not interpolate between points.
CurvePoints pr_curve(const ScoredSample& sample);

// Mean squared difference between score and outcome. Scores must be in [0,1].
double brier_score(const ScoredSample& sample);

// Cumulative calibration curve: subjects ranked by predicted risk descending
// (ties by ascending index); after each prefix,
//   x = cumulative observed cases / total cases,
//   y = cumulative predicted risk  / total cases.
// A leading (0,0) point is included. A calibrated sample tracks the diagonal.
CurvePoints calibration_curve(const ScoredSample& sample);

// Largest |y - x| over the curve's points; the calibration summary used in
// reports.
double max_diagonal_deviation(const CurvePoints& curve);

// Percentile bootstrap interval. Resamples that are degenerate for the metric
// (single class for AUC, no cases for AP) are redrawn and counted; more than
// 10% degenerate draws raises InstabilityError.
IntervalEstimate bootstrap_ci(MetricKind metric, const ScoredSample& sample, int B,
                              std::uint64_t seed);

// Paper-style rendering, e.g. "0.82 (0.78, 0.85)".
std::string format_interval(double point, double lower, double upper);
std::string format_interval(const IntervalEstimate& e);

}  // namespace riskkit
