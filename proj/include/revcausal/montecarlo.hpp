#pragma once

#include <Eigen/Dense>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "revcausal/belief.hpp"
#include "revcausal/errors.hpp"
#include "revcausal/gaussian.hpp"
#include "revcausal/scm.hpp"

namespace revcausal {

/// Simulation parameters. chunk_size = 0 picks draws/64 (at least 1), which
/// keeps enough chunks for the jackknife standard errors.
struct SimConfig {
  std::uint64_t draws = 1'000'000;
  std::uint64_t seed = 0;
  std::uint64_t chunk_size = 0;

  std::uint64_t resolved_chunk_size() const {
    if (chunk_size > 0) return chunk_size;
    return std::max<std::uint64_t>(1, draws / 64);
  }
};

/// Standard normal quantile, evaluated deterministically so variates are
/// bit-reproducible across runs and platforms.
inline double inverse_normal_cdf(double p) {
  return boost::math::erf_inv(2.0 * p - 1.0) * 1.4142135623730950488016887;
}

/// Stateless counter-based generator: variate `lane` of draw `index` depends
/// only on (seed, index, lane). Any chunking or parallel split of the draw
/// range therefore sees identical streams.
class CounterRng {
public:
  static constexpr unsigned kLanes = 4;

  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  /// Uniform in the open interval (0, 1).
  double uniform(std::uint64_t index, unsigned lane) const {
    const std::uint64_t counter = index * kLanes + lane + 1;
    const std::uint64_t bits = mix(seed_ + counter * 0x9E3779B97F4A7C15ull);
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal(std::uint64_t index, unsigned lane) const {
    return inverse_normal_cdf(uniform(index, lane));
  }

private:
  // splitmix64 output function
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t seed_;
};

/// One-pass mean/covariance accumulator (Welford update) with associative
/// merging, so chunked and parallel accumulation agree up to rounding.
class RunningMoments {
public:
  explicit RunningMoments(Eigen::Index dim)
      : n_(0), mean_(Eigen::VectorXd::Zero(dim)), m2_(Eigen::MatrixXd::Zero(dim, dim)) {}

  void add(const Eigen::VectorXd& v) {
    ++n_;
    const Eigen::VectorXd d1 = v - mean_;
    mean_ += d1 / static_cast<double>(n_);
    m2_.noalias() += d1 * (v - mean_).transpose();
  }

  void merge(const RunningMoments& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
      *this = other;
      return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(other.n_);
    const double nt = na + nb;
    const Eigen::VectorXd d = other.mean_ - mean_;
    m2_ += other.m2_ + (d * d.transpose()) * (na * nb / nt);
    mean_ += d * (nb / nt);
    n_ += other.n_;
  }

  std::uint64_t count() const noexcept { return n_; }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }

  /// Unbiased sample covariance; the zero matrix below two samples.
  Eigen::MatrixXd covariance() const {
    if (n_ < 2) return Eigen::MatrixXd::Zero(m2_.rows(), m2_.cols());
    Eigen::MatrixXd c = m2_ / static_cast<double>(n_ - 1);
    return 0.5 * (c + c.transpose());
  }

private:
  std::uint64_t n_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd m2_;
};

/// Finite-sample image of the objective joint.
struct EmpiricalJoint {
  std::vector<std::string> variables;
  Eigen::VectorXd sample_mean;
  Eigen::MatrixXd sample_covariance;
  std::uint64_t draws = 0;
  std::uint64_t chunks = 0;
  /// Leave-one-chunk-out jackknife standard errors; zero with fewer than two
  /// chunks.
  Eigen::VectorXd mean_standard_error;
  Eigen::MatrixXd cov_standard_error;
};

/// Sample mean with a jackknife standard error.
struct WelfareEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::uint64_t draws = 0;
};

namespace detail {

// Drives the strategy and the family's structural equations draw by draw.
// This is the oracle path: it never touches the Gaussian-algebra machinery.
template <typename PerDraw>
inline void run_draws(const Scenario& s, const LinearStrategy& strategy, const SimConfig& config,
                      PerDraw&& per_draw) {
  if (config.draws < 1) throw ValidationError("draws", "draws must be at least 1");
  if (config.resolved_chunk_size() < 1) {
    throw ValidationError("chunk_size", "chunk_size must be at least 1");
  }
  const CounterRng rng(config.seed);
  const double sd_theta = std::sqrt(s.var_theta());
  const double sd_tremble = std::sqrt(strategy.tremble_variance);
  const double sd_eps = std::sqrt(s.var_eps());
  const double sd_eta = std::sqrt(s.var_eta());
  const bool exo = s.family() == Family::ExogeneityOnly;
  const double g = exo ? 0.0 : s.gamma();
  const double l = exo ? 0.0 : s.lambda();
  const double kp = exo ? s.kappa() : 0.0;
  const double al = exo ? s.alpha() : 0.0;
  const double de = exo ? s.delta() : 0.0;

  for (std::uint64_t i = 0; i < config.draws; ++i) {
    const double theta = sd_theta * rng.normal(i, 0);
    const double nu = sd_tremble * rng.normal(i, 1);
    const double eps = sd_eps * rng.normal(i, 2);
    const double eta = sd_eta * rng.normal(i, 3);
    const double a = strategy.intercept + strategy.slope * theta + nu;
    double x, y;
    if (exo) {
      y = de * a + eta;
      x = theta - kp * a + al * y + eps;
    } else {
      x = theta - g * a + eps;
      y = x - l * a + eta;
    }
    per_draw(i, theta, a, x, y);
  }
}

}  // namespace detail

/// Draw i.i.d. shocks, push them through the structural equations, and
/// accumulate streaming moments chunk by chunk. Fully reproducible from the
/// seed; the chunk layout only affects results at rounding level.
inline EmpiricalJoint simulate(const Scenario& scenario, const LinearStrategy& strategy,
                               const SimConfig& config) {
  const std::uint64_t chunk_size = config.resolved_chunk_size();
  std::vector<RunningMoments> chunks;
  chunks.reserve(static_cast<std::size_t>(config.draws / chunk_size + 1));
  RunningMoments current(4);
  Eigen::VectorXd v(4);
  detail::run_draws(scenario, strategy, config,
                    [&](std::uint64_t i, double theta, double a, double x, double y) {
                      v << theta, a, x, y;
                      current.add(v);
                      if ((i + 1) % chunk_size == 0) {
                        chunks.push_back(current);
                        current = RunningMoments(4);
                      }
                    });
  if (current.count() > 0) chunks.push_back(current);

  RunningMoments total(4);
  for (const auto& c : chunks) total.merge(c);

  EmpiricalJoint out;
  out.variables = canonical_variables();
  out.sample_mean = total.mean();
  out.sample_covariance = total.covariance();
  out.draws = total.count();
  out.chunks = chunks.size();
  out.mean_standard_error = Eigen::VectorXd::Zero(4);
  out.cov_standard_error = Eigen::MatrixXd::Zero(4, 4);

  const std::size_t j = chunks.size();
  if (j >= 2) {
    // Leave-one-chunk-out statistics via prefix/suffix merges.
    std::vector<RunningMoments> prefix(j + 1, RunningMoments(4));
    std::vector<RunningMoments> suffix(j + 1, RunningMoments(4));
    for (std::size_t i = 0; i < j; ++i) {
      prefix[i + 1] = prefix[i];
      prefix[i + 1].merge(chunks[i]);
    }
    for (std::size_t i = j; i > 0; --i) {
      suffix[i - 1] = suffix[i];
      suffix[i - 1].merge(chunks[i - 1]);
    }
    std::vector<Eigen::VectorXd> loo_means(j);
    std::vector<Eigen::MatrixXd> loo_covs(j);
    Eigen::VectorXd mean_bar = Eigen::VectorXd::Zero(4);
    Eigen::MatrixXd cov_bar = Eigen::MatrixXd::Zero(4, 4);
    for (std::size_t i = 0; i < j; ++i) {
      RunningMoments loo = prefix[i];
      loo.merge(suffix[i + 1]);
      loo_means[i] = loo.mean();
      loo_covs[i] = loo.covariance();
      mean_bar += loo_means[i];
      cov_bar += loo_covs[i];
    }
    mean_bar /= static_cast<double>(j);
    cov_bar /= static_cast<double>(j);
    Eigen::VectorXd mean_ss = Eigen::VectorXd::Zero(4);
    Eigen::MatrixXd cov_ss = Eigen::MatrixXd::Zero(4, 4);
    for (std::size_t i = 0; i < j; ++i) {
      mean_ss += (loo_means[i] - mean_bar).cwiseAbs2();
      cov_ss += (loo_covs[i] - cov_bar).cwiseAbs2();
    }
    const double factor = static_cast<double>(j - 1) / static_cast<double>(j);
    out.mean_standard_error = (factor * mean_ss).cwiseSqrt();
    out.cov_standard_error = (factor * cov_ss).cwiseSqrt();
  }
  return out;
}

/// Finite-sample OLS of the recursive system the DAG prescribes: exactly
/// belief-fitting applied to the empirical joint.
inline FittedModel empirical_fit(const EmpiricalJoint& empirical, const Dag& dag) {
  GaussianJoint joint(empirical.variables, empirical.sample_mean, empirical.sample_covariance);
  return fit(joint, dag);
}

/// Sample mean of -(x - a)^2 with a leave-one-chunk-out jackknife standard
/// error.
inline WelfareEstimate empirical_welfare(const Scenario& scenario, const LinearStrategy& strategy,
                                         const SimConfig& config) {
  const std::uint64_t chunk_size = config.resolved_chunk_size();
  struct ScalarChunk {
    std::uint64_t n = 0;
    double sum = 0.0;
  };
  std::vector<ScalarChunk> chunks;
  ScalarChunk current;
  detail::run_draws(scenario, strategy, config,
                    [&](std::uint64_t i, double /*theta*/, double a, double x, double /*y*/) {
                      const double u = -(x - a) * (x - a);
                      current.sum += u;
                      ++current.n;
                      if ((i + 1) % chunk_size == 0) {
                        chunks.push_back(current);
                        current = ScalarChunk{};
                      }
                    });
  if (current.n > 0) chunks.push_back(current);

  double total_sum = 0.0;
  std::uint64_t total_n = 0;
  for (const auto& c : chunks) {
    total_sum += c.sum;
    total_n += c.n;
  }

  WelfareEstimate out;
  out.draws = total_n;
  out.value = total_sum / static_cast<double>(total_n);
  const std::size_t j = chunks.size();
  if (j >= 2) {
    std::vector<double> loo(j);
    double bar = 0.0;
    for (std::size_t i = 0; i < j; ++i) {
      loo[i] = (total_sum - chunks[i].sum) / static_cast<double>(total_n - chunks[i].n);
      bar += loo[i];
    }
    bar /= static_cast<double>(j);
    double ss = 0.0;
    for (std::size_t i = 0; i < j; ++i) ss += (loo[i] - bar) * (loo[i] - bar);
    out.standard_error = std::sqrt(ss * static_cast<double>(j - 1) / static_cast<double>(j));
  }
  return out;
}

}  // namespace revcausal
