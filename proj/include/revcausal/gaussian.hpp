#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "revcausal/errors.hpp"

namespace revcausal {

/// Affine conditional of one variable given others:
///   target = intercept + coefficients . given + noise,  noise ~ N(0, residual_variance).
struct LinearConditional {
  std::string target;
  std::vector<std::string> given;
  double intercept = 0.0;
  Eigen::VectorXd coefficients;  // aligned with `given`
  double residual_variance = 0.0;
  /// Set when the conditioning covariance block had condition number > 1e12;
  /// the coefficients are then the minimum-norm pseudoinverse solution.
  bool singular_conditioning = false;

  double coefficient_on(const std::string& name) const {
    for (std::size_t i = 0; i < given.size(); ++i) {
      if (given[i] == name) return coefficients(static_cast<Eigen::Index>(i));
    }
    throw UnknownNodeError("conditional has no coefficient on: " + name);
  }
};

/// Multivariate normal over named variables. The covariance is symmetrized on
/// construction and must be positive semidefinite up to a small clip
/// tolerance. Immutable; all operations below are pure functions.
class GaussianJoint {
public:
  GaussianJoint(std::vector<std::string> variables, Eigen::VectorXd mean,
                const Eigen::MatrixXd& covariance)
      : variables_(std::move(variables)), mean_(std::move(mean)) {
    const auto n = static_cast<Eigen::Index>(variables_.size());
    if (mean_.size() != n || covariance.rows() != n || covariance.cols() != n) {
      throw ValidationError("dimensions", "mean/covariance dimensions do not match variables");
    }
    for (std::size_t i = 0; i < variables_.size(); ++i) {
      for (std::size_t j = i + 1; j < variables_.size(); ++j) {
        if (variables_[i] == variables_[j]) {
          throw ValidationError("variables", "duplicate variable name: " + variables_[i]);
        }
      }
    }
    const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
    const double asym = (covariance - covariance.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale) {
      throw ValidationError("covariance", "covariance asymmetric beyond tolerance");
    }
    cov_ = 0.5 * (covariance + covariance.transpose());
    if (n > 0) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{cov_};
      const double lmax = std::max(0.0, es.eigenvalues().maxCoeff());
      const double lmin = es.eigenvalues().minCoeff();
      const double floor = std::max(1.0, lmax);
      if (lmin < -1e-10 * floor) {
        throw ValidationError("covariance", "covariance not positive semidefinite");
      }
      // Clip negative eigenvalues inside the tolerance band to zero. Rounding
      // noise at the -1e-13 level is left alone so healthy matrices pass
      // through bit-exact; conditioning ignores that band anyway.
      if (lmin < -1e-13 * floor) {
        Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
        cov_ = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
        cov_ = 0.5 * (cov_ + cov_.transpose());
      }
    }
  }

  const std::vector<std::string>& variables() const noexcept { return variables_; }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& covariance() const noexcept { return cov_; }
  std::size_t size() const noexcept { return variables_.size(); }

  std::size_t index_of(const std::string& name) const {
    auto it = std::find(variables_.begin(), variables_.end(), name);
    if (it == variables_.end()) throw UnknownNodeError("unknown variable: " + name);
    return static_cast<std::size_t>(it - variables_.begin());
  }

  bool has_variable(const std::string& name) const {
    return std::find(variables_.begin(), variables_.end(), name) != variables_.end();
  }

  double mean_of(const std::string& name) const {
    return mean_(static_cast<Eigen::Index>(index_of(name)));
  }
  double variance_of(const std::string& name) const {
    const auto i = static_cast<Eigen::Index>(index_of(name));
    return cov_(i, i);
  }
  double covariance_of(const std::string& a, const std::string& b) const {
    return cov_(static_cast<Eigen::Index>(index_of(a)), static_cast<Eigen::Index>(index_of(b)));
  }

private:
  std::vector<std::string> variables_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
};

/// Conditional of `target` given the listed variables, from the joint's
/// covariance via the Schur complement. A singular conditioning block gets the
/// minimum-norm pseudoinverse solution and sets `singular_conditioning`.
/// An empty `given` returns the marginal (intercept = mean, no coefficients).
inline LinearConditional condition(const GaussianJoint& joint, const std::string& target,
                                   const std::vector<std::string>& given) {
  const auto t = static_cast<Eigen::Index>(joint.index_of(target));
  for (const auto& g : given) {
    if (g == target) throw ValidationError("given", "target appears in conditioning set");
  }
  const auto m = static_cast<Eigen::Index>(given.size());

  LinearConditional out;
  out.target = target;
  out.given = given;
  if (m == 0) {
    out.intercept = joint.mean()(t);
    out.coefficients = Eigen::VectorXd(0);
    out.residual_variance = joint.covariance()(t, t);
    return out;
  }

  Eigen::VectorXi gi(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    gi(i) = static_cast<int>(joint.index_of(given[static_cast<std::size_t>(i)]));
  }
  Eigen::MatrixXd block(m, m);
  Eigen::VectorXd cross(m);
  Eigen::VectorXd gmean(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    cross(i) = joint.covariance()(gi(i), t);
    gmean(i) = joint.mean()(gi(i));
    for (Eigen::Index j = 0; j < m; ++j) block(i, j) = joint.covariance()(gi(i), gi(j));
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{block};
  const double lmax = std::max(0.0, es.eigenvalues().maxCoeff());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
  if (lmax > 0.0) {
    const double cutoff = lmax * 1e-13;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double l = es.eigenvalues()(i);
      if (l > cutoff) {
        const Eigen::VectorXd v = es.eigenvectors().col(i);
        w += v * (v.dot(cross) / l);
      }
    }
    out.singular_conditioning = es.eigenvalues().minCoeff() <= lmax * 1e-12;
  } else {
    out.singular_conditioning = true;  // conditioning on constants
  }

  out.coefficients = w;
  out.intercept = joint.mean()(t) - w.dot(gmean);
  out.residual_variance = std::max(0.0, joint.covariance()(t, t) - w.dot(block * w));
  return out;
}

/// Sub-joint over `keep`, in the joint's variable order.
inline GaussianJoint marginalize(const GaussianJoint& joint, const std::vector<std::string>& keep) {
  if (keep.empty()) throw ValidationError("keep", "marginalize requires at least one variable");
  std::vector<std::size_t> idx;
  idx.reserve(keep.size());
  for (const auto& name : keep) idx.push_back(joint.index_of(name));
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());

  const auto m = static_cast<Eigen::Index>(idx.size());
  std::vector<std::string> vars(idx.size());
  Eigen::VectorXd mean(m);
  Eigen::MatrixXd cov(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    vars[static_cast<std::size_t>(i)] = joint.variables()[idx[static_cast<std::size_t>(i)]];
    mean(i) = joint.mean()(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]));
    for (Eigen::Index j = 0; j < m; ++j) {
      cov(i, j) = joint.covariance()(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]),
                                     static_cast<Eigen::Index>(idx[static_cast<std::size_t>(j)]));
    }
  }
  return GaussianJoint(std::move(vars), std::move(mean), cov);
}

/// Weight of the signal in E(eps | eps + eta): var_eps / (var_eps + var_eta).
inline double signal_extraction_weight(double var_eps, double var_eta) {
  if (var_eps < 0.0 || var_eta < 0.0) {
    throw ValidationError("variance", "variances must be nonnegative");
  }
  if (var_eps == 0.0 && var_eta == 0.0) {
    throw DegenerateNoiseError("signal extraction undefined with both variances zero");
  }
  return var_eps / (var_eps + var_eta);
}

}  // namespace revcausal
