#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "revcausal/belief.hpp"
#include "revcausal/errors.hpp"
#include "revcausal/scm.hpp"

namespace revcausal {

/// The first-order condition degenerates: the coefficient of a in the
/// subjective conditional is numerically 1, so a = E(x | theta, a) has no
/// unique solution.
class DegenerateFocError : public Error {
public:
  using Error::Error;
};

/// The personal-equilibrium solver exhausted its iteration budget. Carries the
/// last iterate and the residual trace.
class NoConvergenceError : public Error {
public:
  NoConvergenceError(const std::string& message, LinearStrategy last,
                     std::vector<double> residuals)
      : Error(message), last_(last), residuals_(std::move(residuals)) {}

  const LinearStrategy& last_iterate() const noexcept { return last_; }
  const std::vector<double>& residual_trace() const noexcept { return residuals_; }

private:
  LinearStrategy last_;
  std::vector<double> residuals_;
};

struct EquilibriumReport {
  LinearStrategy strategy;            // solved strategy
  int iterations = 0;                 // belief-pipeline evaluations used
  double residual = 0.0;              // |dk| + |db| at the last step
  double c2_margin = 0.0;             // |1 - c2| at the solution
  double welfare = 0.0;               // E[-(x-a)^2] at the solved (b, k), tremble stripped
  LinearStrategy benchmark_strategy;
  double welfare_benchmark = 0.0;

  double welfare_gap() const { return std::max(0.0, welfare_benchmark - welfare); }
};

/// Optimal strategy when the DM's model equals the true one. Independent of
/// all noise variances.
inline LinearStrategy benchmark_strategy(const Scenario& scenario) {
  if (scenario.family() == Family::ExogeneityOnly) {
    return {0.0, 1.0 / (1.0 + scenario.kappa() - scenario.alpha() * scenario.delta()), 0.0};
  }
  return {0.0, 1.0 / (1.0 + scenario.gamma()), 0.0};
}

/// Hand-derived equilibrium slope for each family. Serves as the analytic
/// cross-check for the solver, not as its implementation.
inline LinearStrategy closed_form_strategy(const Scenario& scenario) {
  switch (scenario.family()) {
    case Family::Main:
      return {0.0, 1.0 / (1.0 + scenario.gamma() + scenario.tau() * (1.0 - scenario.lambda())), 0.0};
    case Family::ExogeneityOnly:
      return {0.0, 1.0 / (1.0 + scenario.kappa()), 0.0};
    case Family::ReverseOnly:
      return {0.0, 1.0 / (1.0 + scenario.gamma()), 0.0};
  }
  throw Error("unreachable");
}

/// Exact E[-(x-a)^2] under the objective joint induced by the strategy,
/// computed from the joint's moments.
inline double objective_welfare(const Scenario& scenario, const LinearStrategy& strategy) {
  const GaussianJoint joint = objective_joint(scenario, strategy);
  const double dm = joint.mean_of("x") - joint.mean_of("a");
  const double var = joint.variance_of("x") + joint.variance_of("a") -
                     2.0 * joint.covariance_of("x", "a");
  return -(dm * dm + var);
}

namespace detail {

// E(x | theta, a) under the belief the strategy induces, as affine terms.
struct ReplyTerms {
  double intercept;
  double coeff_theta;
  double coeff_a;
};

inline ReplyTerms reply_terms(const Scenario& scenario, const Dag& subjective,
                              const LinearStrategy& strategy) {
  const GaussianJoint joint = objective_joint(scenario, strategy);
  const SubjectiveBelief belief = belief_under_dag(joint, subjective);
  const LinearConditional& c = belief.conditional_x;
  return {c.intercept, c.coefficients(0), c.coefficients(1)};
}

constexpr double kFocMargin = 1e-9;

}  // namespace detail

/// The strategy solving a = E(x | theta, a) against the belief induced by
/// `current`. Preserves the current tremble.
inline LinearStrategy best_reply(const Scenario& scenario, const LinearStrategy& current,
                                 const Dag& subjective) {
  const detail::ReplyTerms t = detail::reply_terms(scenario, subjective, current);
  const double denom = 1.0 - t.coeff_a;
  if (std::abs(denom) < detail::kFocMargin) {
    throw DegenerateFocError("subjective conditional has coefficient 1 on the action");
  }
  return {t.intercept / denom, t.coeff_theta / denom, current.tremble_variance};
}

inline LinearStrategy best_reply(const Scenario& scenario, const LinearStrategy& current) {
  return best_reply(scenario, current, subjective_dag(scenario));
}

/// Personal-equilibrium solve at a single tremble level against an arbitrary
/// subjective DAG. Starts with best-reply iteration (damping 0.5 once a step
/// oscillates). The ReverseOnly reply map has slope -tau at the fixed point,
/// so plain iteration diverges for tau >= 1; when iteration stalls, the
/// solver switches to bracketed bisection on the continuous FOC residual.
/// The iteration count in the report is the number of belief-pipeline
/// evaluations.
inline EquilibriumReport solve_personal_equilibrium(const Scenario& scenario,
                                                    const Dag& subjective, LinearStrategy init,
                                                    double tol = 1e-10, int max_iter = 200) {
  if (!(tol > 0.0)) throw ValidationError("tol", "tol must be positive");
  if (max_iter < 1) throw ValidationError("max_iter", "max_iter must be at least 1");

  const double tremble =
      init.tremble_variance > 0.0 ? init.tremble_variance : scenario.default_tremble();
  LinearStrategy cur{init.intercept, init.slope, tremble};

  int evals = 0;
  std::vector<double> trace;
  bool converged = false;
  double residual = 0.0;

  auto terms_at = [&](const LinearStrategy& s) {
    if (evals >= max_iter) {
      throw NoConvergenceError("no personal equilibrium within max_iter", cur, trace);
    }
    ++evals;
    return detail::reply_terms(scenario, subjective, s);
  };

  // Phase 1: best-reply iteration.
  const int phase1_budget = std::min(max_iter, 30);
  double prev_dk = std::numeric_limits<double>::quiet_NaN();
  bool damped = false;
  detail::ReplyTerms t{};
  while (evals < phase1_budget) {
    t = terms_at(cur);
    const double denom = 1.0 - t.coeff_a;
    if (std::abs(denom) < detail::kFocMargin) break;  // near a reply-map pole
    const double nk = t.coeff_theta / denom;
    const double nb = t.intercept / denom;
    const double dk = nk - cur.slope;
    const double db = nb - cur.intercept;
    residual = std::abs(dk) + std::abs(db);
    trace.push_back(residual);
    if (residual <= tol) {
      cur.intercept = nb;
      cur.slope = nk;
      converged = true;
      break;
    }
    if (!damped && std::isfinite(prev_dk) && dk * prev_dk < 0.0) damped = true;
    const double step = damped ? 0.5 : 1.0;
    cur.intercept += step * db;
    cur.slope += step * dk;
    prev_dk = dk;
    if (!std::isfinite(cur.slope) || std::abs(cur.slope) > 1e12) break;
  }

  if (!converged) {
    // Phase 2: bisection on the FOC slope residual.
    auto H = [&](double k) {
      const detail::ReplyTerms rt = terms_at({0.0, k, tremble});
      return rt.coeff_theta + (rt.coeff_a - 1.0) * k;
    };
    double lo = 0.0;
    double hlo = H(lo);
    double hi = lo, hhi = hlo;
    if (hlo != 0.0) {
      const double dir = hlo > 0.0 ? 1.0 : -1.0;  // residual falls as k grows past the root
      double span = std::max(1.0, std::abs(init.slope));
      bool bracketed = false;
      for (int i = 0; i < 40; ++i) {
        hi = lo + dir * span;
        hhi = H(hi);
        if (hhi == 0.0 || (hhi > 0.0) != (hlo > 0.0)) {
          bracketed = true;
          break;
        }
        lo = hi;
        hlo = hhi;
        span *= 2.0;
      }
      if (!bracketed) {
        throw NoConvergenceError("could not bracket the equilibrium slope", cur, trace);
      }
    }
    if (hhi == 0.0) {
      lo = hi;
    } else {
      while (std::abs(hi - lo) >
             8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(hi))) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double hmid = H(mid);
        if (hmid == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((hmid > 0.0) == (hlo > 0.0)) {
          lo = mid;
          hlo = hmid;
        } else {
          hi = mid;
        }
      }
    }
    const double k_star = 0.5 * (lo + hi);

    // Intercept: the reply intercept is affine in b at fixed k, so solve it
    // exactly from two probes.
    const detail::ReplyTerms t0 = terms_at({0.0, k_star, tremble});
    const double denom0 = 1.0 - t0.coeff_a;
    if (std::abs(denom0) < detail::kFocMargin) {
      throw DegenerateFocError("subjective conditional has coefficient 1 on the action");
    }
    double b_star = 0.0;
    const double u = t0.intercept / denom0;
    if (u != 0.0) {
      const detail::ReplyTerms t1 = terms_at({1.0, k_star, tremble});
      const double v = t1.intercept / (1.0 - t1.coeff_a) - u;
      if (std::abs(1.0 - v) < detail::kFocMargin) {
        throw NoConvergenceError("intercept fixed point is degenerate", cur, trace);
      }
      b_star = u / (1.0 - v);
    }

    cur.intercept = b_star;
    cur.slope = k_star;
    t = terms_at(cur);
    const double denom = 1.0 - t.coeff_a;
    if (std::abs(denom) < detail::kFocMargin) {
      throw DegenerateFocError("subjective conditional has coefficient 1 on the action");
    }
    residual = std::abs(t.coeff_theta / denom - cur.slope) +
               std::abs(t.intercept / denom - cur.intercept);
    trace.push_back(residual);
    if (residual > tol) {
      throw NoConvergenceError("fixed point residual above tolerance", cur, trace);
    }
  }

  EquilibriumReport report;
  report.strategy = cur;
  report.iterations = evals;
  report.residual = residual;
  report.c2_margin = std::abs(1.0 - t.coeff_a);
  report.welfare = objective_welfare(scenario, {cur.intercept, cur.slope, 0.0});
  report.benchmark_strategy = benchmark_strategy(scenario);
  report.welfare_benchmark = objective_welfare(scenario, report.benchmark_strategy);
  return report;
}

inline EquilibriumReport solve_personal_equilibrium(const Scenario& scenario, LinearStrategy init,
                                                    double tol = 1e-10, int max_iter = 200) {
  return solve_personal_equilibrium(scenario, subjective_dag(scenario), init, tol, max_iter);
}

namespace detail {

// Value at t = 0 of the quadratic through (t[i], v[i]).
inline double extrapolate_to_zero(const std::array<double, 3>& t, const std::array<double, 3>& v) {
  double acc = 0.0;
  for (int i = 0; i < 3; ++i) {
    double w = 1.0;
    for (int j = 0; j < 3; ++j) {
      if (j != i) w *= t[j] / (t[j] - t[i]);
    }
    acc += w * v[i];
  }
  return acc;
}

}  // namespace detail

/// Reporting-grade solve: runs solve_personal_equilibrium at trembles
/// {1e-4, 1e-6, 1e-8} * var_theta and Richardson-extrapolates (b, k) to zero
/// tremble. The reported strategy carries tremble 0; iterations/residual are
/// the worst single solve, c2_margin comes from the smallest tremble.
inline EquilibriumReport solve_equilibrium(const Scenario& scenario, const Dag& subjective,
                                           LinearStrategy init = {}, double tol = 1e-10,
                                           int max_iter = 200) {
  const std::array<double, 3> scales = {1e-4, 1e-6, 1e-8};
  std::array<double, 3> trembles{};
  std::array<double, 3> slopes{};
  std::array<double, 3> intercepts{};
  EquilibriumReport last;
  int worst_iterations = 0;
  double worst_residual = 0.0;
  for (int i = 0; i < 3; ++i) {
    trembles[i] = scales[static_cast<std::size_t>(i)] * scenario.var_theta();
    LinearStrategy start{init.intercept, init.slope, trembles[i]};
    last = solve_personal_equilibrium(scenario, subjective, start, tol, max_iter);
    slopes[i] = last.strategy.slope;
    intercepts[i] = last.strategy.intercept;
    worst_iterations = std::max(worst_iterations, last.iterations);
    worst_residual = std::max(worst_residual, last.residual);
  }

  EquilibriumReport report = last;  // smallest tremble: keep its c2_margin
  report.strategy = {detail::extrapolate_to_zero(trembles, intercepts),
                     detail::extrapolate_to_zero(trembles, slopes), 0.0};
  report.iterations = worst_iterations;
  report.residual = worst_residual;
  report.welfare = objective_welfare(scenario, report.strategy);
  return report;
}

inline EquilibriumReport solve_equilibrium(const Scenario& scenario, LinearStrategy init = {},
                                           double tol = 1e-10, int max_iter = 200) {
  return solve_equilibrium(scenario, subjective_dag(scenario), init, tol, max_iter);
}

/// Welfare at the benchmark minus welfare at the solved equilibrium. The
/// benchmark is objectively optimal among linear strategies, so this is
/// nonnegative; it is the objective cost of the DM's causal error.
inline double welfare_gap(const Scenario& scenario) {
  return solve_equilibrium(scenario).welfare_gap();
}

}  // namespace revcausal
