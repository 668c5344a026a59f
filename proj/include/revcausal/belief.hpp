#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

#include "revcausal/dag.hpp"
#include "revcausal/errors.hpp"
#include "revcausal/gaussian.hpp"
#include "revcausal/scm.hpp"

namespace revcausal {

/// A DAG fitted to a joint distribution: one conditional per node, each
/// regressed on the node's DAG parents.
struct FittedModel {
  Dag dag;
  std::vector<LinearConditional> factors;  // aligned with dag.nodes()

  const LinearConditional& factor(const std::string& node) const {
    return factors[dag.index_of(node)];
  }
  bool any_singular() const {
    for (const auto& f : factors) {
      if (f.singular_conditioning) return true;
    }
    return false;
  }
};

/// Regress every node on its DAG parents within `joint`. Root nodes get their
/// marginal (intercept = mean, no coefficients, residual = variance). This is
/// OLS estimation of the recursive system the DAG prescribes.
inline FittedModel fit(const GaussianJoint& joint, const Dag& dag) {
  FittedModel out{dag, {}};
  out.factors.reserve(dag.nodes().size());
  for (const auto& node : dag.nodes()) {
    out.factors.push_back(condition(joint, node, dag.parents(node)));
  }
  return out;
}

/// The unique Gaussian joint whose factorization along fitted.dag equals the
/// fitted factors, assembled by forward traversal in topological order.
/// Variables come out in the DAG's declared node order.
inline GaussianJoint compose(const FittedModel& fitted) {
  const auto& nodes = fitted.dag.nodes();
  const auto n = static_cast<Eigen::Index>(nodes.size());

  // Each node as an affine function of one independent residual shock per
  // node; parents are complete before their children by topological order.
  Eigen::MatrixXd load = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd shock_var = Eigen::VectorXd::Zero(n);
  for (const auto& node : fitted.dag.topological_order()) {
    const auto i = static_cast<Eigen::Index>(fitted.dag.index_of(node));
    const LinearConditional& f = fitted.factors[static_cast<std::size_t>(i)];
    load(i, i) = 1.0;
    shock_var(i) = f.residual_variance;
    shift(i) = f.intercept;
    for (std::size_t j = 0; j < f.given.size(); ++j) {
      const auto p = static_cast<Eigen::Index>(fitted.dag.index_of(f.given[j]));
      const double c = f.coefficients(static_cast<Eigen::Index>(j));
      load.row(i) += c * load.row(p);
      shift(i) += c * shift(p);
    }
  }
  const Eigen::MatrixXd cov = load * shock_var.asDiagonal() * load.transpose();
  return GaussianJoint(nodes, shift, cov);
}

/// The belief a DM with causal model `dag` extracts from `joint`: the
/// composed subjective joint plus the conditional of x given (theta, a)
/// inside it.
struct SubjectiveBelief {
  GaussianJoint joint;               // composed subjective distribution
  LinearConditional conditional_x;   // E(x | theta, a) under that distribution
};

inline SubjectiveBelief belief_under_dag(const GaussianJoint& joint, const Dag& dag) {
  GaussianJoint composed = compose(fit(joint, dag));
  LinearConditional cx = condition(composed, "x", {"theta", "a"});
  return SubjectiveBelief{std::move(composed), std::move(cx)};
}

/// Fit the scenario's subjective DAG to the objective joint, compose the
/// factors, and condition x on (theta, a). For Main/ExogeneityOnly the
/// composed model integrates y with its marginal; for ReverseOnly it retains
/// the fitted y-given-a factor, so the same composition covers both.
inline SubjectiveBelief subjective_conditional(const Scenario& scenario,
                                               const GaussianJoint& joint) {
  return belief_under_dag(joint, subjective_dag(scenario));
}

}  // namespace revcausal
