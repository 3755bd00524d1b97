// Simplex-reflection minimizer (Nelder-Mead) behind the shared optimizer
// interface. Constraints are folded into the objective with a fixed
// quadratic penalty, so results are only meaningful for problems that are
// unconstrained or feasible throughout.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbnc/optim.hpp"

namespace qbnc {

namespace {

constexpr double kPenaltyWeight = 1e6;

struct BudgetExhausted {};

int pick_best(const std::vector<EvalRecord>& history) {
  int best = -1;
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (history[i].max_violation <= 1e-6) {
      if (best < 0 || history[i].f < history[best].f)
        best = static_cast<int>(i);
    }
  }
  if (best < 0) {
    for (std::size_t i = 0; i < history.size(); ++i) {
      if (best < 0 ||
          history[i].max_violation < history[best].max_violation ||
          (history[i].max_violation == history[best].max_violation &&
           history[i].f < history[best].f))
        best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace

OptimizationResult nelder_mead_minimize(const Objective& objective,
                                        std::vector<double> x0,
                                        const std::vector<Constraint>& constraints,
                                        const OptimizerConfig& config) {
  const int n = static_cast<int>(x0.size());
  const int m = static_cast<int>(constraints.size());
  if (n < 1)
    throw std::invalid_argument("nelder_mead_minimize: empty start point");
  for (const double v : x0)
    if (!std::isfinite(v))
      throw std::invalid_argument("nelder_mead_minimize: non-finite start point");
  if (!(config.rho_begin > 0.0))
    throw std::invalid_argument("nelder_mead_minimize: rho_begin must be positive");
  if (!(config.rho_end > 0.0 && config.rho_end <= config.rho_begin))
    throw std::invalid_argument(
        "nelder_mead_minimize: need 0 < rho_end <= rho_begin");
  if (config.max_evals < 1)
    throw std::invalid_argument("nelder_mead_minimize: max_evals must be >= 1");

  std::vector<EvalRecord> history;
  std::vector<std::vector<double>> points;

  // Returns the penalized merit value and records the raw evaluation.
  auto eval = [&](const std::vector<double>& x) -> double {
    if (static_cast<int>(history.size()) >= config.max_evals)
      throw BudgetExhausted{};
    const double f = objective(std::span<const double>(x));
    if (!std::isfinite(f))
      throw std::runtime_error(
          "nelder_mead_minimize: objective returned a non-finite value at "
          "evaluation " +
          std::to_string(history.size() + 1));
    double viol = 0.0;
    for (int k = 0; k < m; ++k) {
      const double c = constraints[k](std::span<const double>(x));
      if (!std::isfinite(c))
        throw std::runtime_error("nelder_mead_minimize: constraint " +
                                 std::to_string(k) +
                                 " returned a non-finite value");
      viol = std::max(viol, -c);
    }
    history.push_back({static_cast<int>(history.size()) + 1, f, viol});
    points.push_back(x);
    return f + kPenaltyWeight * viol * viol;
  };

  std::vector<std::vector<double>> simplex;
  std::vector<double> merit;
  OptimStatus status = OptimStatus::converged;

  try {
    simplex.reserve(n + 1);
    simplex.push_back(x0);
    for (int i = 0; i < n; ++i) {
      std::vector<double> v = x0;
      v[i] += config.rho_begin;
      simplex.push_back(std::move(v));
    }
    merit.resize(n + 1);
    for (int i = 0; i <= n; ++i) merit[i] = eval(simplex[i]);

    for (;;) {
      std::vector<int> order(n + 1);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(),
                [&](int a, int b) { return merit[a] < merit[b]; });
      const int ibest = order[0];
      const int iworst = order[n];
      const int isecond = order[n - 1];

      double diameter = 0.0;
      for (int i = 0; i <= n; ++i) {
        for (int j = 0; j < n; ++j)
          diameter = std::max(diameter,
                              std::abs(simplex[i][j] - simplex[ibest][j]));
      }
      if (diameter < config.rho_end) break;

      std::vector<double> centroid(n, 0.0);
      for (int i = 0; i <= n; ++i) {
        if (i == iworst) continue;
        for (int j = 0; j < n; ++j) centroid[j] += simplex[i][j];
      }
      for (int j = 0; j < n; ++j) centroid[j] /= n;

      std::vector<double> xr(n);
      for (int j = 0; j < n; ++j)
        xr[j] = centroid[j] + (centroid[j] - simplex[iworst][j]);
      const double mr = eval(xr);

      if (mr < merit[ibest]) {
        std::vector<double> xe(n);
        for (int j = 0; j < n; ++j)
          xe[j] = centroid[j] + 2.0 * (centroid[j] - simplex[iworst][j]);
        const double me = eval(xe);
        if (me < mr) {
          simplex[iworst] = std::move(xe);
          merit[iworst] = me;
        } else {
          simplex[iworst] = std::move(xr);
          merit[iworst] = mr;
        }
        continue;
      }
      if (mr < merit[isecond]) {
        simplex[iworst] = std::move(xr);
        merit[iworst] = mr;
        continue;
      }

      bool contracted = false;
      if (mr < merit[iworst]) {
        std::vector<double> xc(n);  // outside contraction
        for (int j = 0; j < n; ++j)
          xc[j] = centroid[j] + 0.5 * (centroid[j] - simplex[iworst][j]);
        const double mc = eval(xc);
        if (mc <= mr) {
          simplex[iworst] = std::move(xc);
          merit[iworst] = mc;
          contracted = true;
        }
      } else {
        std::vector<double> xc(n);  // inside contraction
        for (int j = 0; j < n; ++j)
          xc[j] = centroid[j] - 0.5 * (centroid[j] - simplex[iworst][j]);
        const double mc = eval(xc);
        if (mc < merit[iworst]) {
          simplex[iworst] = std::move(xc);
          merit[iworst] = mc;
          contracted = true;
        }
      }
      if (contracted) continue;

      for (int i = 0; i <= n; ++i) {
        if (i == ibest) continue;
        for (int j = 0; j < n; ++j)
          simplex[i][j] =
              simplex[ibest][j] + 0.5 * (simplex[i][j] - simplex[ibest][j]);
        merit[i] = eval(simplex[i]);
      }
    }
  } catch (const BudgetExhausted&) {
    status = OptimStatus::max_evals_reached;
  }

  if (history.empty())
    throw std::runtime_error("nelder_mead_minimize: no evaluations performed");

  OptimizationResult res;
  res.n_evals = static_cast<int>(history.size());
  res.status = status;
  res.history = history;
  const int best = pick_best(history);
  res.x_best = points[best];
  res.f_best = history[best].f;
  res.max_violation = history[best].max_violation;
  return res;
}

}  // namespace qbnc
