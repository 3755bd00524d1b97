#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace qbnc {

// Derivative-free minimization of f(x) subject to c_i(x) >= 0.
using Objective = std::function<double(std::span<const double>)>;
using Constraint = std::function<double(std::span<const double>)>;

struct OptimizerConfig {
  double rho_begin = 1.0;   // initial trust-region radius
  double rho_end = 1e-4;    // final radius; also the termination scale
  int max_evals = 1000;
  std::uint64_t seed = 0;   // reserved; both methods here are deterministic
};

enum class OptimStatus { converged, max_evals_reached };

struct EvalRecord {
  int index = 0;  // 1-based evaluation number
  double f = 0.0;
  double max_violation = 0.0;  // max_i max(0, -c_i(x))
};

struct OptimizationResult {
  std::vector<double> x_best;
  double f_best = 0.0;
  double max_violation = 0.0;  // at x_best
  int n_evals = 0;
  OptimStatus status = OptimStatus::converged;
  std::vector<EvalRecord> history;  // one record per evaluation, in order
};

// Powell's trust-region method with linear interpolation models on an
// n+1 point simplex and the two-stage LP subproblem; the merit function is
// f + parmu * (max constraint violation) with Powell's penalty update.
// x_best/f_best are the best evaluated point: lowest f among points with
// violation <= 1e-6, falling back to the least-violating point when none
// qualify. Throws on a non-finite objective or constraint value.
OptimizationResult cobyla_minimize(const Objective& objective,
                                   std::vector<double> x0,
                                   const std::vector<Constraint>& constraints,
                                   const OptimizerConfig& config);

// Simplex-reflection fallback behind the same interface (A/B comparisons).
// Constraints enter through a fixed quadratic penalty, so it is only
// suitable for lightly constrained or unconstrained problems.
OptimizationResult nelder_mead_minimize(const Objective& objective,
                                        std::vector<double> x0,
                                        const std::vector<Constraint>& constraints,
                                        const OptimizerConfig& config);

}  // namespace qbnc
