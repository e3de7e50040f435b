#include "riskkit/svm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "riskkit/errors.hpp"
#include "riskkit/rng.hpp"

namespace riskkit {

std::string KernelSpec::describe() const {
  char buf[96];
  switch (kind) {
    case KernelKind::linear:
      return "linear";
    case KernelKind::gaussian:
      std::snprintf(buf, sizeof buf, "gaussian(gamma=%g)", gamma);
      return buf;
    case KernelKind::polynomial:
      std::snprintf(buf, sizeof buf, "polynomial(degree=%d, gamma=%g, coef0=%g)", degree,
                    gamma, coef0);
      return buf;
  }
  return "linear";
}

json KernelSpec::to_json() const {
  switch (kind) {
    case KernelKind::linear: return json{{"kind", "linear"}};
    case KernelKind::gaussian: return json{{"kind", "gaussian"}, {"gamma", gamma}};
    case KernelKind::polynomial:
      return json{{"kind", "polynomial"}, {"degree", degree}, {"gamma", gamma},
                  {"coef0", coef0}};
  }
  return json{{"kind", "linear"}};
}

KernelSpec KernelSpec::from_json(const json& j) {
  KernelSpec s;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "linear") {
    s.kind = KernelKind::linear;
  } else if (kind == "gaussian") {
    s.kind = KernelKind::gaussian;
    s.gamma = j.at("gamma").get<double>();
    if (s.gamma <= 0) throw ConfigError("gaussian kernel needs gamma > 0");
  } else if (kind == "polynomial") {
    s.kind = KernelKind::polynomial;
    s.degree = j.at("degree").get<int>();
    s.gamma = j.at("gamma").get<double>();
    s.coef0 = j.value("coef0", 0.0);
    if (s.degree < 1) throw ConfigError("polynomial kernel needs degree >= 1");
    if (s.gamma <= 0) throw ConfigError("polynomial kernel needs gamma > 0");
  } else {
    throw ConfigError("unknown kernel kind '" + kind + "'");
  }
  return s;
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> z) {
  if (x.size() != z.size())
    throw ShapeError("kernel arguments have lengths " + std::to_string(x.size()) + " and " +
                     std::to_string(z.size()));
  switch (spec.kind) {
    case KernelKind::linear: {
      double s = 0;
      for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * z[i];
      return s;
    }
    case KernelKind::polynomial: {
      if (spec.gamma <= 0 || spec.degree < 1)
        throw ConfigError("polynomial kernel parameters invalid");
      double s = 0;
      for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * z[i];
      double base = spec.gamma * s + spec.coef0;
      double r = 1.0;
      for (int d = 0; d < spec.degree; ++d) r *= base;
      return r;
    }
    case KernelKind::gaussian: {
      if (spec.gamma <= 0) throw ConfigError("gaussian kernel parameters invalid");
      double ss = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - z[i];
        ss += d * d;
      }
      return std::exp(-spec.gamma * ss);
    }
  }
  return 0;
}

namespace {

std::vector<double> kernel_matrix(const std::vector<std::vector<double>>& rows,
                                  const KernelSpec& spec) {
  const std::size_t n = rows.size();
  std::vector<double> k(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    k[i * n + i] = kernel_eval(spec, rows[i], rows[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = kernel_eval(spec, rows[i], rows[j]);
      k[i * n + j] = v;
      k[j * n + i] = v;
    }
  }
  return k;
}

double sigmoid(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace

SmoResult solve_smo(const std::vector<std::vector<double>>& rows,
                    const std::vector<int>& labels, const KernelSpec& spec, double c,
                    double kkt_tol, std::size_t max_updates) {
  const std::size_t n = rows.size();
  if (labels.size() != n) throw ShapeError("label count mismatch");
  if (c <= 0) throw ConfigError("soft-margin cost must be positive");
  bool pos = false, neg = false;
  for (int yl : labels) {
    if (yl == 1) pos = true;
    else if (yl == -1) neg = true;
    else throw LabelError("SMO labels must be +1 or -1");
  }
  if (!pos || !neg) throw LabelError("SMO needs both classes");

  const std::vector<double> kmat = kernel_matrix(rows, spec);
  std::vector<double> alpha(n, 0.0), grad(n, -1.0);

  auto in_up = [&](std::size_t t) {
    return (labels[t] == 1 && alpha[t] < c) || (labels[t] == -1 && alpha[t] > 0);
  };
  auto in_low = [&](std::size_t t) {
    return (labels[t] == -1 && alpha[t] < c) || (labels[t] == 1 && alpha[t] > 0);
  };

  SmoResult out;
  double gap = 0;
  while (true) {
    // max-violating pair; ties resolved to the lowest index by strict compare
    std::ptrdiff_t bi = -1, bj = -1;
    double up_val = -1e300, low_val = 1e300;
    for (std::size_t t = 0; t < n; ++t) {
      double v = -labels[t] * grad[t];
      if (in_up(t) && v > up_val) {
        up_val = v;
        bi = static_cast<std::ptrdiff_t>(t);
      }
      if (in_low(t) && v < low_val) {
        low_val = v;
        bj = static_cast<std::ptrdiff_t>(t);
      }
    }
    gap = up_val - low_val;
    if (bi < 0 || bj < 0 || gap <= kkt_tol) break;
    if (out.pair_updates >= max_updates)
      throw ConvergenceError("SMO hit the update cap with KKT violation " +
                             std::to_string(gap));

    const std::size_t i = static_cast<std::size_t>(bi), j = static_cast<std::size_t>(bj);
    double quad = kmat[i * n + i] + kmat[j * n + j] - 2.0 * kmat[i * n + j];
    if (quad <= 0) quad = 1e-12;
    double t_star = gap / quad;

    // feasible step range along alpha_i += t*y_i, alpha_j -= t*y_j
    double hi = labels[i] == 1 ? c - alpha[i] : alpha[i];
    double hj = labels[j] == 1 ? alpha[j] : c - alpha[j];
    double t_step = std::min(t_star, std::min(hi, hj));

    alpha[i] = std::clamp(alpha[i] + t_step * labels[i], 0.0, c);
    alpha[j] = std::clamp(alpha[j] - t_step * labels[j], 0.0, c);
    for (std::size_t t = 0; t < n; ++t)
      grad[t] += t_step * labels[t] * (kmat[t * n + i] - kmat[t * n + j]);
    out.pair_updates++;
  }
  out.worst_violation = gap;

  double free_sum = 0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0 && alpha[t] < c) {
      free_sum += -labels[t] * grad[t];
      free_count++;
    }
  }
  double up_val = -1e300, low_val = 1e300;
  for (std::size_t t = 0; t < n; ++t) {
    double v = -labels[t] * grad[t];
    if (in_up(t)) up_val = std::max(up_val, v);
    if (in_low(t)) low_val = std::min(low_val, v);
  }
  out.bias = free_count ? free_sum / static_cast<double>(free_count)
                        : (up_val + low_val) / 2.0;
  out.alpha = std::move(alpha);
  return out;
}

double dual_objective(const std::vector<std::vector<double>>& rows,
                      const std::vector<int>& labels, const KernelSpec& spec,
                      std::span<const double> alpha) {
  const std::size_t n = rows.size();
  double lin = 0, quad = 0;
  for (std::size_t i = 0; i < n; ++i) {
    lin += alpha[i];
    for (std::size_t j = 0; j < n; ++j)
      quad += alpha[i] * alpha[j] * labels[i] * labels[j] * kernel_eval(spec, rows[i], rows[j]);
  }
  return lin - 0.5 * quad;
}

namespace {

struct RawProblem {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
};

RawProblem to_raw(const FeatureMatrix& m, const std::vector<std::size_t>& idx) {
  RawProblem p;
  p.rows.reserve(idx.size());
  p.labels.reserve(idx.size());
  for (auto i : idx) {
    auto r = m.row(i);
    p.rows.emplace_back(r.begin(), r.end());
    p.labels.push_back(m.y[i] == 1 ? 1 : -1);
  }
  return p;
}

double raw_decision(const RawProblem& p, const SmoResult& solved, const KernelSpec& spec,
                    std::span<const double> x) {
  double d = solved.bias;
  for (std::size_t t = 0; t < p.rows.size(); ++t)
    if (solved.alpha[t] > 0)
      d += solved.alpha[t] * p.labels[t] * kernel_eval(spec, p.rows[t], x);
  return d;
}

// Stratified assignment into `k` parts, continuing the round-robin counter
// across classes so part sizes stay within one of each other.
std::vector<std::size_t> stratified_parts(const std::vector<std::int8_t>& y, std::size_t k,
                                          std::uint64_t seed) {
  std::vector<std::size_t> part(y.size());
  Stream stream(seed);
  std::size_t counter = 0;
  for (int cls : {1, 0}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == cls) members.push_back(i);
    stream.shuffle(members);
    for (auto i : members) part[i] = counter++ % k;
  }
  return part;
}

}  // namespace

PlattParams fit_platt(std::span<const double> decisions, std::span<const std::int8_t> y) {
  if (decisions.size() != y.size() || decisions.empty())
    throw ShapeError("Platt inputs misaligned");
  double prior1 = 0, prior0 = 0;
  for (auto v : y) (v == 1 ? prior1 : prior0) += 1;
  if (prior1 == 0 || prior0 == 0) throw LabelError("Platt fit needs both classes");

  const double hi_t = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo_t = 1.0 / (prior0 + 2.0);
  const std::size_t n = decisions.size();
  std::vector<double> target(n);
  for (std::size_t i = 0; i < n; ++i) target[i] = y[i] == 1 ? hi_t : lo_t;

  auto objective = [&](double a, double b) {
    double f = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double fApB = decisions[i] * a + b;
      if (fApB >= 0) f += target[i] * fApB + std::log1p(std::exp(-fApB));
      else f += (target[i] - 1.0) * fApB + std::log1p(std::exp(fApB));
    }
    return f;
  };

  const double sigma = 1e-12, eps = 1e-5, min_step = 1e-10;
  double a = 0.0, b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  double fval = objective(a, b);
  for (int it = 0; it < 100; ++it) {
    double h11 = sigma, h22 = sigma, h21 = 0, g1 = 0, g2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double fApB = decisions[i] * a + b;
      double p = fApB >= 0 ? std::exp(-fApB) / (1.0 + std::exp(-fApB))
                           : 1.0 / (1.0 + std::exp(fApB));
      double q = 1.0 - p;
      double w = p * q;
      h11 += decisions[i] * decisions[i] * w;
      h22 += w;
      h21 += decisions[i] * w;
      double dd = target[i] - p;
      g1 += decisions[i] * dd;
      g2 += dd;
    }
    if (std::abs(g1) < eps && std::abs(g2) < eps) break;
    double det = h11 * h22 - h21 * h21;
    double da = -(h22 * g1 - h21 * g2) / det;
    double db = -(-h21 * g1 + h11 * g2) / det;
    double gd = g1 * da + g2 * db;
    double step = 1.0;
    while (step >= min_step) {
      double na = a + step * da, nb = b + step * db;
      double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < min_step) break;
  }
  if (!std::isfinite(a) || !std::isfinite(b))
    throw NumericError("Platt scaling did not produce finite parameters");
  return {a, b};
}

SvmModel fit_svm(const FeatureMatrix& m, const KernelSpec& spec, double c, double kkt_tol,
                 std::uint64_t seed) {
  validate_for_fit(m);

  std::vector<std::size_t> all(m.n);
  std::iota(all.begin(), all.end(), 0);
  RawProblem full = to_raw(m, all);
  SmoResult solved = solve_smo(full.rows, full.labels, spec, c, kkt_tol);

  SvmModel model;
  model.kernel = spec;
  model.c = c;
  model.bias = solved.bias;
  model.feature_names = m.feature_names;
  for (std::size_t t = 0; t < m.n; ++t) {
    if (solved.alpha[t] > 0) {
      model.support_vectors.push_back(full.rows[t]);
      model.alphas.push_back(solved.alpha[t] * full.labels[t]);
    }
  }

  // Platt inputs: out-of-fold decision values from an internal stratified
  // 5-fold; too few of either class falls back to in-sample values.
  std::size_t n1 = 0, n0 = 0;
  for (auto v : m.y) (v == 1 ? n1 : n0)++;
  std::vector<double> decisions(m.n);
  bool out_of_fold = n1 >= 2 && n0 >= 2 && m.n >= 5;
  if (out_of_fold) {
    auto part = stratified_parts(m.y, 5, derive_seed(seed, 0x706c6174));
    for (std::size_t f = 0; f < 5 && out_of_fold; ++f) {
      std::vector<std::size_t> train, test;
      for (std::size_t i = 0; i < m.n; ++i)
        (part[i] == f ? test : train).push_back(i);
      if (test.empty()) continue;
      RawProblem sub = to_raw(m, train);
      bool p = false, q = false;
      for (int yl : sub.labels) (yl == 1 ? p : q) = true;
      if (!p || !q) {
        out_of_fold = false;
        break;
      }
      SmoResult fold_solved = solve_smo(sub.rows, sub.labels, spec, c, kkt_tol);
      for (auto i : test) decisions[i] = raw_decision(sub, fold_solved, spec, m.row(i));
    }
  }
  if (!out_of_fold) {
    for (std::size_t i = 0; i < m.n; ++i)
      decisions[i] = raw_decision(full, solved, spec, m.row(i));
  }
  model.platt = fit_platt(decisions, m.y);
  return model;
}

double decision_value(const SvmModel& model, std::span<const double> x) {
  std::size_t width = model.feature_names.empty()
                          ? (model.support_vectors.empty() ? x.size()
                                                           : model.support_vectors[0].size())
                          : model.feature_names.size();
  if (x.size() != width)
    throw ShapeError("row has " + std::to_string(x.size()) + " features, model expects " +
                     std::to_string(width));
  double d = model.bias;
  for (std::size_t t = 0; t < model.support_vectors.size(); ++t)
    d += model.alphas[t] * kernel_eval(model.kernel, model.support_vectors[t], x);
  return d;
}

double predict_risk(const SvmModel& model, std::span<const double> x) {
  if (!model.platt) throw StateError("SVM model has no probability calibration");
  double d = decision_value(model, x);
  return sigmoid(-(model.platt->a * d + model.platt->b));
}

}  // namespace riskkit
