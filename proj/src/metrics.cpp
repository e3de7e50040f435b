#include "riskkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "riskkit/errors.hpp"
#include "riskkit/rng.hpp"

namespace riskkit {

std::size_t ScoredSample::case_count() const {
  std::size_t p = 0;
  for (auto v : y) p += (v != 0);
  return p;
}

void validate_sample(const ScoredSample& sample) {
  if (sample.y.size() != sample.s.size())
    throw ShapeError("scored sample: label and score lengths differ");
  if (sample.y.empty()) throw ShapeError("scored sample: empty");
  if (!sample.ids.empty() && sample.ids.size() != sample.y.size())
    throw ShapeError("scored sample: id list length differs from labels");
  for (auto v : sample.y)
    if (v != 0 && v != 1) throw LabelError("scored sample: labels must be 0 or 1");
  for (double v : sample.s)
    if (!std::isfinite(v)) throw NumericError("scored sample: non-finite score");
}

std::string metric_name(MetricKind m) {
  switch (m) {
    case MetricKind::auc: return "auc";
    case MetricKind::ap: return "ap";
    case MetricKind::brier: return "brier";
  }
  return "?";
}

namespace {

void require_both_classes(const ScoredSample& sample) {
  std::size_t p = sample.case_count();
  if (p == 0 || p == sample.size())
    throw DegenerateSampleError("metric needs both classes; sample has " +
                                std::to_string(p) + " cases of " +
                                std::to_string(sample.size()));
}

// Indices sorted by score descending; tied scores keep ascending index order.
std::vector<std::size_t> order_desc_stable(const std::vector<double>& s) {
  std::vector<std::size_t> ord(s.size());
  std::iota(ord.begin(), ord.end(), std::size_t{0});
  std::stable_sort(ord.begin(), ord.end(),
                   [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  return ord;
}

}  // namespace

double auc(const ScoredSample& sample) {
  validate_sample(sample);
  require_both_classes(sample);
  const std::size_t n = sample.size();

  std::vector<std::size_t> ord(n);
  std::iota(ord.begin(), ord.end(), std::size_t{0});
  std::sort(ord.begin(), ord.end(),
            [&](std::size_t a, std::size_t b) { return sample.s[a] < sample.s[b]; });

  // Twice the case rank-sum, walked over tie blocks so it stays an integer.
  long long two_ranksum = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && sample.s[ord[j + 1]] == sample.s[ord[i]]) ++j;
    long long cases_in_block = 0;
    for (std::size_t t = i; t <= j; ++t) cases_in_block += (sample.y[ord[t]] != 0);
    // 1-based ranks i+1..j+1 share the average rank (i+j+2)/2.
    two_ranksum += cases_in_block * static_cast<long long>(i + j + 2);
    i = j + 1;
  }

  const long long n1 = static_cast<long long>(sample.case_count());
  const long long n0 = static_cast<long long>(n) - n1;
  const long long two_u = two_ranksum - n1 * (n1 + 1);
  return static_cast<double>(two_u) / (2.0 * static_cast<double>(n1) * static_cast<double>(n0));
}

CurvePoints roc_curve(const ScoredSample& sample) {
  validate_sample(sample);
  require_both_classes(sample);
  const double P = static_cast<double>(sample.case_count());
  const double N = static_cast<double>(sample.size()) - P;

  auto ord = order_desc_stable(sample.s);
  CurvePoints curve;
  curve.kind = CurveKind::roc;
  curve.pts.emplace_back(0.0, 0.0);

  std::size_t tp = 0, fp = 0, i = 0;
  const std::size_t n = ord.size();
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && sample.s[ord[j + 1]] == sample.s[ord[i]]) ++j;
    for (std::size_t t = i; t <= j; ++t) {
      if (sample.y[ord[t]] != 0)
        ++tp;
      else
        ++fp;
    }
    curve.pts.emplace_back(static_cast<double>(fp) / N, static_cast<double>(tp) / P);
    i = j + 1;
  }
  return curve;
}

double average_precision(const ScoredSample& sample) {
  validate_sample(sample);
  if (sample.case_count() == 0)
    throw DegenerateSampleError("average precision needs at least one case");

  auto ord = order_desc_stable(sample.s);
  double sum = 0.0;
  std::size_t tp = 0;
  for (std::size_t r = 0; r < ord.size(); ++r) {
    if (sample.y[ord[r]] != 0) {
      ++tp;
      sum += static_cast<double>(tp) / static_cast<double>(r + 1);
    }
  }
  return sum / static_cast<double>(sample.case_count());
}

CurvePoints pr_curve(const ScoredSample& sample) {
  validate_sample(sample);
  if (sample.case_count() == 0)
    throw DegenerateSampleError("precision-recall curve needs at least one case");
  const double P = static_cast<double>(sample.case_count());

  auto ord = order_desc_stable(sample.s);
  CurvePoints curve;
  curve.kind = CurveKind::pr;

  std::size_t tp = 0, seen = 0, i = 0;
  const std::size_t n = ord.size();
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && sample.s[ord[j + 1]] == sample.s[ord[i]]) ++j;
    for (std::size_t t = i; t <= j; ++t) {
      ++seen;
      if (sample.y[ord[t]] != 0) ++tp;
    }
    curve.pts.emplace_back(static_cast<double>(tp) / P,
                           static_cast<double>(tp) / static_cast<double>(seen));
    i = j + 1;
  }
  return curve;
}

double brier_score(const ScoredSample& sample) {
  validate_sample(sample);
  for (double v : sample.s)
    if (v < 0.0 || v > 1.0)
      throw DomainError("brier score needs scores in [0,1]; got " + std::to_string(v));
  double sum = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    double d = sample.s[i] - static_cast<double>(sample.y[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(sample.size());
}

CurvePoints calibration_curve(const ScoredSample& sample) {
  validate_sample(sample);
  if (sample.case_count() == 0)
    throw DegenerateSampleError("calibration curve needs at least one case");
  for (double v : sample.s)
    if (v < 0.0 || v > 1.0)
      throw DomainError("calibration curve needs scores in [0,1]");
  const double P = static_cast<double>(sample.case_count());

  auto ord = order_desc_stable(sample.s);
  CurvePoints curve;
  curve.kind = CurveKind::calibration;
  curve.pts.reserve(ord.size() + 1);
  curve.pts.emplace_back(0.0, 0.0);

  double cum_cases = 0.0, cum_pred = 0.0;
  for (std::size_t idx : ord) {
    cum_cases += static_cast<double>(sample.y[idx]);
    cum_pred += sample.s[idx];
    curve.pts.emplace_back(cum_cases / P, cum_pred / P);
  }
  return curve;
}

double max_diagonal_deviation(const CurvePoints& curve) {
  double worst = 0.0;
  for (auto [x, y] : curve.pts) worst = std::max(worst, std::abs(y - x));
  return worst;
}

namespace {

double metric_value(MetricKind m, const ScoredSample& sample) {
  switch (m) {
    case MetricKind::auc: return auc(sample);
    case MetricKind::ap: return average_precision(sample);
    case MetricKind::brier: return brier_score(sample);
  }
  throw ConfigError("unknown metric");
}

bool resample_degenerate(MetricKind m, const ScoredSample& sample) {
  std::size_t p = sample.case_count();
  switch (m) {
    case MetricKind::auc: return p == 0 || p == sample.size();
    case MetricKind::ap: return p == 0;
    case MetricKind::brier: return false;
  }
  return false;
}

// Type-7 empirical quantile (linear interpolation between order statistics).
double quantile_sorted(const std::vector<double>& v, double p) {
  if (v.size() == 1) return v[0];
  double h = p * static_cast<double>(v.size() - 1);
  auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= v.size()) return v.back();
  double frac = h - static_cast<double>(lo);
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

}  // namespace

IntervalEstimate bootstrap_ci(MetricKind metric, const ScoredSample& sample, int B,
                              std::uint64_t seed) {
  validate_sample(sample);
  if (B < 100) throw ConfigError("bootstrap needs B >= 100; got " + std::to_string(B));

  const std::size_t n = sample.size();
  const int max_degenerate = B / 10;
  int degenerate = 0;

  std::vector<double> replicates;
  replicates.reserve(static_cast<std::size_t>(B));
  ScoredSample re;
  re.y.resize(n);
  re.s.resize(n);

  for (int b = 0; b < B; ++b) {
    Stream stream = child_stream(seed, static_cast<std::uint64_t>(b));
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) {
        auto j = static_cast<std::size_t>(stream.next_below(n));
        re.y[i] = sample.y[j];
        re.s[i] = sample.s[j];
      }
      if (!resample_degenerate(metric, re)) break;
      if (++degenerate > max_degenerate)
        throw InstabilityError("bootstrap unstable: metric " + metric_name(metric) +
                               " degenerate on more than 10% of resamples");
    }
    replicates.push_back(metric_value(metric, re));
  }

  std::sort(replicates.begin(), replicates.end());
  IntervalEstimate est;
  est.point = metric_value(metric, sample);
  est.lower = quantile_sorted(replicates, 0.025);
  est.upper = quantile_sorted(replicates, 0.975);
  est.method = "percentile bootstrap";
  est.B = B;
  est.seed = seed;
  est.degenerate_redraws = degenerate;
  return est;
}

std::string format_interval(double point, double lower, double upper) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.2f (%.2f, %.2f)", point, lower, upper);
  return buf;
}

std::string format_interval(const IntervalEstimate& e) {
  return format_interval(e.point, e.lower, e.upper);
}

}  // namespace riskkit
