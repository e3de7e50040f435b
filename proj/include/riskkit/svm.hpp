#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskkit/encode.hpp"

namespace riskkit {

enum class KernelKind { linear, polynomial, gaussian };

struct KernelSpec {
  KernelKind kind = KernelKind::linear;
  int degree = 3;       // polynomial
  double gamma = 0.0;   // polynomial, gaussian
  double coef0 = 0.0;   // polynomial

  std::string describe() const;
  json to_json() const;
  static KernelSpec from_json(const json& j);
};

double kernel_eval(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> z);

struct PlattParams {
  double a = 0.0, b = 0.0;
};

struct SvmModel {
  KernelSpec kernel;
  double c = 1.0;
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> alphas;  // signed by label: alpha_i * y_i
  double bias = 0.0;
  std::optional<PlattParams> platt;
  std::vector<std::string> feature_names;
};

// Raw SMO output on a ±1-labeled problem; exposed so the dual-feasibility and
// objective properties can be checked directly.
struct SmoResult {
  std::vector<double> alpha;  // unsigned, in [0, C]
  double bias = 0.0;
  std::size_t pair_updates = 0;
  double worst_violation = 0.0;
};

// Max-violating-pair SMO over the dual. rows[i] is row i of an n x k matrix;
// labels are +1/-1. Stops when the KKT gap is within kkt_tol; throws
// ConvergenceError at the update cap.
SmoResult solve_smo(const std::vector<std::vector<double>>& rows,
                    const std::vector<int>& labels, const KernelSpec& spec, double c,
                    double kkt_tol, std::size_t max_updates = 1000000);

// Dual objective value at a feasible alpha, for sanity comparisons.
double dual_objective(const std::vector<std::vector<double>>& rows,
                      const std::vector<int>& labels, const KernelSpec& spec,
                      std::span<const double> alpha);

// Fits the soft-margin machine, then Platt's sigmoid on out-of-fold decision
// values from an internal stratified 5-fold split (seeded).
SvmModel fit_svm(const FeatureMatrix& m, const KernelSpec& spec, double c,
                 double kkt_tol = 1e-3, std::uint64_t seed = 0);

double decision_value(const SvmModel& model, std::span<const double> x);
double predict_risk(const SvmModel& model, std::span<const double> x);

// Lin-Weng-Keerthi Newton fit of P(y=1|d) = 1/(1+exp(a*d+b)).
PlattParams fit_platt(std::span<const double> decisions, std::span<const std::int8_t> y);

}  // namespace riskkit
