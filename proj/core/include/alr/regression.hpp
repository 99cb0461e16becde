#pragma once

#include <string>
#include <string_view>

#include "alr/types.hpp"

namespace alr {

enum class SolverKind { ols, ridge, lasso, elastic_net };

/// Linear solver and its penalty weights.
///
/// Objectives (intercept fitted by centering, never penalized):
///   ols          ||y - Xb||^2
///   ridge        ||y - Xb||^2 + lambda ||b||^2
///   lasso        ||y - Xb||^2 + lambda ||b||_1
///   elastic_net  ||y - Xb||^2 + lambda ||b||_1 + lambda2 ||b||^2
///
/// With `lambda_per_sample` set, `lambda` (and `lambda2`) are numerators:
/// the effective weight is lambda / K, K being the number of training rows
/// unless a caller resolves it against another K first.
struct SolverConfig {
  SolverKind kind = SolverKind::ridge;
  double lambda = 0.0;
  double lambda2 = 0.0;
  double cd_tolerance = 1e-6;
  int cd_max_iters = 10000;
  bool lambda_per_sample = false;

  static SolverConfig ols();
  static SolverConfig ridge(double lambda);
  /// lambda = numerator / K, recomputed for every fit.
  static SolverConfig ridge_per_sample(double numerator = 10.0);
  static SolverConfig lasso(double lambda = 0.001);
  static SolverConfig elastic_net(double l1 = 0.0005, double l2 = 0.0005);

  /// Fixes per-sample weights against K; a no-op otherwise.
  SolverConfig resolved(std::size_t k) const;

  /// Canonical mini-grammar form, accepted back by parse_solver.
  std::string to_string() const;

  void validate() const;

  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

/// Parses "ols", "ridge" (10/K), "ridge:lambda=2", "ridge:per_k=10",
/// "lasso", "lasso:lambda=0.01", "elastic_net:l1=..,l2=..", plus optional
/// "tol=" and "iters=" knobs. Throws ConfigError.
SolverConfig parse_solver(std::string_view text);

struct LinearModel {
  Vector coefficients;
  double intercept = 0.0;
  SolverConfig solver;  // resolved (no per-sample flag left)
  bool converged = true;
  int iterations = 0;

  std::size_t dims() const { return static_cast<std::size_t>(coefficients.size()); }

  /// {"coefficients": [...], "intercept": c, "solver": {...}}
  std::string to_json() const;
  static LinearModel from_json(const std::string& text);
};

/// Fits one output. Rank-deficient OLS (and ridge with lambda 0) returns the
/// minimum-norm solution. Coordinate descent that runs out of iterations
/// returns its last iterate with `converged = false`.
LinearModel fit(const Eigen::Ref<const Matrix>& features, const Eigen::Ref<const Vector>& targets,
                const SolverConfig& cfg);

Vector predict(const LinearModel& model, const Eigen::Ref<const Matrix>& features);

/// Mean absolute coefficient difference; the intercept is excluded.
double coefficient_mae(const LinearModel& a, const LinearModel& b);

}  // namespace alr
