#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "revcausal/dag.hpp"
#include "revcausal/errors.hpp"
#include "revcausal/gaussian.hpp"

namespace revcausal {

/// Canonical variable order used for every matrix layout: state, action, and
/// the two outcome variables.
inline const std::vector<std::string>& canonical_variables() {
  static const std::vector<std::string> vars = {"theta", "a", "x", "y"};
  return vars;
}

enum class Family {
  Main,            // x = theta - gamma*a + eps;  y = x - lambda*a + eta
  ExogeneityOnly,  // y = delta*a + eta;          x = theta - kappa*a + alpha*y + eps
  ReverseOnly,     // same equations as Main, subjective model keeps the a->y link
};

inline std::string family_name(Family f) {
  switch (f) {
    case Family::Main: return "main";
    case Family::ExogeneityOnly: return "exogeneity-only";
    case Family::ReverseOnly: return "reverse-only";
  }
  return "?";
}

inline Family family_from_name(const std::string& name) {
  if (name == "main") return Family::Main;
  if (name == "exogeneity-only") return Family::ExogeneityOnly;
  if (name == "reverse-only") return Family::ReverseOnly;
  throw ValidationError("family", "unknown family: " + name +
                                      " (expected main, exogeneity-only or reverse-only)");
}

/// The DM's decision rule a = intercept + slope*theta + tremble, with
/// tremble ~ N(0, tremble_variance) independent of everything else.
struct LinearStrategy {
  double intercept = 0.0;
  double slope = 0.0;
  double tremble_variance = 0.0;
};

/// Parameter bundle selecting one of the three structural families plus its
/// noise variances. Construct through the factory functions, which validate
/// ranges unless `unsafe` is set (range checks skipped, output tagged).
class Scenario {
public:
  static Scenario main(double gamma, double lambda, double var_theta, double var_eps,
                       double var_eta, bool unsafe = false) {
    Scenario s(Family::Main, var_theta, var_eps, var_eta, unsafe);
    s.gamma_ = require_finite("gamma", gamma);
    s.lambda_ = require_finite("lambda", lambda);
    if (!unsafe) {
      require_unit_interval("gamma", gamma);
      require_unit_interval("lambda", lambda);
    }
    return s;
  }

  static Scenario reverse_only(double gamma, double lambda, double var_theta, double var_eps,
                               double var_eta, bool unsafe = false) {
    Scenario s = main(gamma, lambda, var_theta, var_eps, var_eta, unsafe);
    s.family_ = Family::ReverseOnly;
    return s;
  }

  static Scenario exogeneity_only(double kappa, double alpha, double delta, double var_theta,
                                  double var_eps, double var_eta, bool unsafe = false) {
    Scenario s(Family::ExogeneityOnly, var_theta, var_eps, var_eta, unsafe);
    s.kappa_ = require_finite("kappa", kappa);
    s.alpha_ = require_finite("alpha", alpha);
    s.delta_ = require_finite("delta", delta);
    if (!unsafe) {
      require_open_unit_interval("kappa", kappa);
      require_open_unit_interval("alpha", alpha);
      require_open_unit_interval("delta", delta);
    }
    return s;
  }

  Family family() const noexcept { return family_; }
  bool unsafe_params() const noexcept { return unsafe_; }

  double gamma() const { return offsetting_param("gamma", gamma_); }
  double lambda() const { return offsetting_param("lambda", lambda_); }
  double kappa() const { return structural_param("kappa", kappa_); }
  double alpha() const { return structural_param("alpha", alpha_); }
  double delta() const { return structural_param("delta", delta_); }

  double var_theta() const noexcept { return var_theta_; }
  double var_eps() const noexcept { return var_eps_; }
  double var_eta() const noexcept { return var_eta_; }

  /// Noise-precision ratio var_eps / var_eta.
  double tau() const {
    if (var_eta_ == 0.0) throw DegenerateNoiseError("tau undefined: var_eta is zero");
    return var_eps_ / var_eta_;
  }

  /// Signal-extraction weight var_eps / (var_eps + var_eta) = tau/(1+tau).
  double beta() const { return signal_extraction_weight(var_eps_, var_eta_); }

  /// True when the action has no causal effect on x (gamma = 0), so the DM
  /// faces a pure prediction problem.
  bool pure_prediction() const {
    return family_ != Family::ExogeneityOnly && gamma_ == 0.0;
  }

  /// Regularizing tremble used whenever a fitting step must condition on both
  /// theta and a; pure strategies make that block singular.
  double default_tremble() const noexcept { return 1e-6 * var_theta_; }

private:
  Scenario(Family f, double var_theta, double var_eps, double var_eta, bool unsafe)
      : family_(f), var_theta_(var_theta), var_eps_(var_eps), var_eta_(var_eta), unsafe_(unsafe) {
    require_finite("var_theta", var_theta);
    require_finite("var_eps", var_eps);
    require_finite("var_eta", var_eta);
    if (var_theta <= 0.0) throw ValidationError("var_theta", "var_theta must be positive");
    if (var_eps < 0.0) throw ValidationError("var_eps", "var_eps must be nonnegative");
    if (var_eta < 0.0) throw ValidationError("var_eta", "var_eta must be nonnegative");
  }

  static double require_finite(const std::string& field, double v) {
    if (!std::isfinite(v)) throw ValidationError(field, field + " must be finite");
    return v;
  }
  static void require_unit_interval(const std::string& field, double v) {
    if (v < 0.0 || v > 1.0) throw ValidationError(field, field + " out of [0,1]");
  }
  static void require_open_unit_interval(const std::string& field, double v) {
    if (v <= 0.0 || v >= 1.0) throw ValidationError(field, field + " out of (0,1)");
  }

  double offsetting_param(const std::string& field, double v) const {
    if (family_ == Family::ExogeneityOnly) {
      throw ValidationError(field, field + " not a parameter of family exogeneity-only");
    }
    return v;
  }
  double structural_param(const std::string& field, double v) const {
    if (family_ != Family::ExogeneityOnly) {
      throw ValidationError(field, field + " not a parameter of family " + family_name(family_));
    }
    return v;
  }

  Family family_;
  double gamma_ = 0.0, lambda_ = 0.0;
  double kappa_ = 0.0, alpha_ = 0.0, delta_ = 0.0;
  double var_theta_, var_eps_, var_eta_;
  bool unsafe_ = false;
};

/// Causal structure of the actual data-generating process.
inline Dag true_dag(const Scenario& scenario) {
  const auto& v = canonical_variables();
  if (scenario.family() == Family::ExogeneityOnly) {
    // y is a direct cause of x, and the action feeds y.
    return Dag(v, {{"theta", "a"}, {"theta", "x"}, {"a", "x"}, {"y", "x"}, {"a", "y"}});
  }
  return Dag(v, {{"theta", "a"}, {"theta", "x"}, {"a", "x"}, {"x", "y"}, {"a", "y"}});
}

/// Causal structure the DM fits to the data. Main/ExogeneityOnly treat y as
/// an exogenous cause of x; ReverseOnly inverts the x-y link but keeps a->y.
inline Dag subjective_dag(const Scenario& scenario) {
  const auto& v = canonical_variables();
  if (scenario.family() == Family::ReverseOnly) {
    return Dag(v, {{"theta", "a"}, {"theta", "x"}, {"a", "x"}, {"y", "x"}, {"a", "y"}});
  }
  return Dag(v, {{"theta", "a"}, {"theta", "x"}, {"a", "x"}, {"y", "x"}});
}

/// Exact joint of (theta, a, x, y) under the structural equations and the
/// given strategy, assembled as an affine image of the independent shocks
/// (theta, tremble, eps, eta); no sampling involved.
inline GaussianJoint objective_joint(const Scenario& scenario, const LinearStrategy& strategy) {
  if (!std::isfinite(strategy.intercept) || !std::isfinite(strategy.slope)) {
    throw ValidationError("strategy", "strategy intercept/slope must be finite");
  }
  if (!(strategy.tremble_variance >= 0.0)) {
    throw ValidationError("tremble_variance", "tremble_variance must be nonnegative");
  }
  const double k = strategy.slope;
  const double b = strategy.intercept;

  // Rows: theta, a, x, y.  Columns: shocks (theta, tremble, eps, eta).
  Eigen::Matrix4d load = Eigen::Matrix4d::Zero();
  Eigen::Vector4d shift = Eigen::Vector4d::Zero();
  load(0, 0) = 1.0;
  load.row(1) << k, 1.0, 0.0, 0.0;  // a = b + k*theta + tremble
  shift(1) = b;
  if (scenario.family() == Family::ExogeneityOnly) {
    const double kp = scenario.kappa(), al = scenario.alpha(), de = scenario.delta();
    load.row(3) = de * load.row(1);  // y = delta*a + eta
    load(3, 3) += 1.0;
    shift(3) = de * b;
    load.row(2) = load.row(0) - kp * load.row(1) + al * load.row(3);  // x = theta - kappa*a + alpha*y + eps
    load(2, 2) += 1.0;
    shift(2) = -kp * b + al * shift(3);
  } else {
    const double g = scenario.gamma(), l = scenario.lambda();
    load.row(2) = load.row(0) - g * load.row(1);  // x = theta - gamma*a + eps
    load(2, 2) += 1.0;
    shift(2) = -g * b;
    load.row(3) = load.row(2) - l * load.row(1);  // y = x - lambda*a + eta
    load(3, 3) += 1.0;
    shift(3) = shift(2) - l * b;
  }

  const Eigen::Vector4d shock_var(scenario.var_theta(), strategy.tremble_variance,
                                  scenario.var_eps(), scenario.var_eta());
  const Eigen::Matrix4d cov = load * shock_var.asDiagonal() * load.transpose();
  return GaussianJoint(canonical_variables(), shift, cov);
}

}  // namespace revcausal
