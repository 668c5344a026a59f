#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <random>

#include <revcausal/gaussian.hpp>
#include <revcausal/scm.hpp>

#include "oracles.hpp"

using Catch::Matchers::WithinAbs;
using namespace revcausal;

namespace {

// Random PSD joint over m variables.
GaussianJoint random_joint(std::mt19937_64& gen, int m) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd a(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) a(i, j) = z(gen);
  }
  Eigen::MatrixXd cov = a * a.transpose() + 0.05 * Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd mean(m);
  for (int i = 0; i < m; ++i) mean(i) = z(gen);
  std::vector<std::string> vars;
  for (int i = 0; i < m; ++i) vars.push_back("v" + std::to_string(i));
  return GaussianJoint(vars, mean, cov);
}

}  // namespace

TEST_CASE("signal extraction weight") {
  CHECK(signal_extraction_weight(1.0, 1.0) == 0.5);
  CHECK(signal_extraction_weight(0.0, 1.0) == 0.0);
  CHECK(signal_extraction_weight(1.0, 0.0) == 1.0);
  CHECK_THROWS_AS(signal_extraction_weight(0.0, 0.0), DegenerateNoiseError);
  CHECK_THROWS_AS(signal_extraction_weight(-1.0, 1.0), ValidationError);
}

TEST_CASE("bivariate conditional reproduces the signal-extraction weight") {
  for (auto [ve, vh] : {std::pair{1.0, 1.0}, {2.0, 0.5}, {0.25, 4.0}}) {
    // (eps, z) with z = eps + eta.
    Eigen::MatrixXd cov(2, 2);
    cov << ve, ve, ve, ve + vh;
    const GaussianJoint joint({"eps", "z"}, Eigen::VectorXd::Zero(2), cov);
    const LinearConditional c = condition(joint, "eps", {"z"});
    CHECK_THAT(c.coefficients(0), WithinAbs(signal_extraction_weight(ve, vh), 1e-12));
    CHECK_THAT(c.intercept, WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("conditioning on independent variables gives zero coefficients") {
  Eigen::MatrixXd cov = Eigen::Vector3d(2.0, 1.0, 0.5).asDiagonal();
  const GaussianJoint joint({"u", "v", "w"}, Eigen::Vector3d(3.0, -1.0, 0.0), cov);
  const LinearConditional c = condition(joint, "u", {"v", "w"});
  CHECK_THAT(c.coefficients(0), WithinAbs(0.0, 1e-14));
  CHECK_THAT(c.coefficients(1), WithinAbs(0.0, 1e-14));
  CHECK_THAT(c.intercept, WithinAbs(3.0, 1e-14));
  CHECK_THAT(c.residual_variance, WithinAbs(2.0, 1e-14));
  CHECK_FALSE(c.singular_conditioning);
}

TEST_CASE("main-scenario conditional of x given (theta, a, y)") {
  // gamma = lambda = 0.5, unit variances, benchmark slope: the regression of
  // x on (theta, a, y) has coefficients (1-beta, beta*lambda+beta*gamma-gamma,
  // beta) = (0.5, 0, 0.5).
  const auto s = Scenario::main(0.5, 0.5, 1.0, 1.0, 1.0);
  const LinearStrategy strat{0.0, 1.0 / 1.5, s.default_tremble()};
  const auto joint = objective_joint(s, strat);
  const LinearConditional c = condition(joint, "x", {"theta", "a", "y"});
  CHECK_THAT(c.coefficients(0), WithinAbs(0.5, 1e-8));
  CHECK_THAT(c.coefficients(1), WithinAbs(0.0, 1e-8));
  CHECK_THAT(c.coefficients(2), WithinAbs(0.5, 1e-8));
  CHECK_THAT(c.intercept, WithinAbs(0.0, 1e-10));
}

TEST_CASE("main-scenario conditional agrees with brute-force OLS", "[oracle]") {
  // Same regression, sampled: a perceptible tremble keeps the regressor block
  // well conditioned at finite draws; the population coefficients are
  // tremble-invariant.
  const auto s = Scenario::main(0.5, 0.5, 1.0, 1.0, 1.0);
  const LinearStrategy strat{0.0, 1.0 / 1.5, 0.05};
  const Eigen::Vector4d ols = oracle::ols_x_on_theta_a_y(s, strat, 2'000'000, 2024);
  const LinearConditional c = condition(objective_joint(s, strat), "x", {"theta", "a", "y"});
  CHECK_THAT(ols(1), WithinAbs(c.coefficients(0), 2e-2));
  CHECK_THAT(ols(2), WithinAbs(c.coefficients(1), 2e-2));
  CHECK_THAT(ols(3), WithinAbs(c.coefficients(2), 2e-2));
}

TEST_CASE("law of total variance holds on random joints") {
  std::mt19937_64 gen(5150);
  for (int round = 0; round < 120; ++round) {
    const int m = 2 + static_cast<int>(gen() % 5);
    const GaussianJoint joint = random_joint(gen, m);
    const auto& vars = joint.variables();
    const std::string target = vars[gen() % vars.size()];
    std::vector<std::string> given;
    for (const auto& v : vars) {
      if (v != target && gen() % 2 == 0) given.push_back(v);
    }
    const LinearConditional c = condition(joint, target, given);

    double explained = 0.0;
    for (std::size_t i = 0; i < given.size(); ++i) {
      for (std::size_t j = 0; j < given.size(); ++j) {
        explained += c.coefficients(static_cast<Eigen::Index>(i)) *
                     c.coefficients(static_cast<Eigen::Index>(j)) *
                     joint.covariance_of(given[i], given[j]);
      }
    }
    CHECK_THAT(explained + c.residual_variance, WithinAbs(joint.variance_of(target), 1e-9));
  }
}

TEST_CASE("embedding a conditional and re-extracting it round-trips") {
  std::mt19937_64 gen(777);
  std::normal_distribution<double> z;
  for (int round = 0; round < 120; ++round) {
    const int m = 1 + static_cast<int>(gen() % 4);
    const GaussianJoint given_joint = random_joint(gen, m);
    Eigen::VectorXd beta(m);
    for (int i = 0; i < m; ++i) beta(i) = z(gen);
    const double icpt = z(gen);
    const double resid = 0.1 + std::abs(z(gen));

    // Synthesize the (given..., target) joint implied by the conditional.
    Eigen::MatrixXd cov(m + 1, m + 1);
    cov.topLeftCorner(m, m) = given_joint.covariance();
    const Eigen::VectorXd cross = given_joint.covariance() * beta;
    cov.block(0, m, m, 1) = cross;
    cov.block(m, 0, 1, m) = cross.transpose();
    cov(m, m) = beta.dot(cross) + resid;
    Eigen::VectorXd mean(m + 1);
    mean.head(m) = given_joint.mean();
    mean(m) = icpt + beta.dot(given_joint.mean());
    std::vector<std::string> vars = given_joint.variables();
    vars.push_back("target");

    const GaussianJoint joint(vars, mean, cov);
    const LinearConditional c = condition(joint, "target", given_joint.variables());
    for (int i = 0; i < m; ++i) CHECK_THAT(c.coefficients(i), WithinAbs(beta(i), 1e-9));
    CHECK_THAT(c.intercept, WithinAbs(icpt, 1e-9));
    CHECK_THAT(c.residual_variance, WithinAbs(resid, 1e-9));
  }
}

TEST_CASE("marginalize keeps order and sub-moments") {
  const auto s = Scenario::main(0.4, 0.7, 1.5, 1.0, 2.0);
  const auto joint = objective_joint(s, {0.0, 0.5, 0.0});

  const GaussianJoint all = marginalize(joint, joint.variables());
  CHECK(all.variables() == joint.variables());
  CHECK((all.covariance() - joint.covariance()).cwiseAbs().maxCoeff() == 0.0);

  const GaussianJoint just_y = marginalize(joint, {"y"});
  CHECK(just_y.variables() == std::vector<std::string>{"y"});
  CHECK_THAT(just_y.mean()(0), WithinAbs(0.0, 1e-15));

  const GaussianJoint just_theta = marginalize(joint, {"theta"});
  CHECK_THAT(just_theta.covariance()(0, 0), WithinAbs(1.5, 1e-15));

  // Requested order does not matter; the joint's order is preserved.
  const GaussianJoint pair = marginalize(joint, {"x", "theta"});
  CHECK(pair.variables() == std::vector<std::string>{"theta", "x"});

  CHECK_THROWS_AS(marginalize(joint, {"zz"}), UnknownNodeError);
  CHECK_THROWS_AS(marginalize(joint, {}), ValidationError);
}

TEST_CASE("marginalizing away unrelated variables leaves conditionals intact") {
  std::mt19937_64 gen(31337);
  for (int round = 0; round < 60; ++round) {
    const GaussianJoint joint = random_joint(gen, 5);
    const auto& vars = joint.variables();
    const std::string target = vars[0];
    const std::vector<std::string> given = {vars[1], vars[2]};
    const GaussianJoint reduced = marginalize(joint, {vars[0], vars[1], vars[2]});

    const LinearConditional full = condition(joint, target, given);
    const LinearConditional red = condition(reduced, target, given);
    CHECK_THAT(red.intercept, WithinAbs(full.intercept, 1e-9));
    CHECK_THAT(red.residual_variance, WithinAbs(full.residual_variance, 1e-9));
    for (int i = 0; i < 2; ++i) CHECK_THAT(red.coefficients(i), WithinAbs(full.coefficients(i), 1e-9));
  }
}

TEST_CASE("construction validates shape and definiteness") {
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, 0.2, 1.0;
  CHECK_THROWS_AS(GaussianJoint({"u", "v"}, Eigen::Vector2d::Zero(), asym), ValidationError);

  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(GaussianJoint({"u", "v"}, Eigen::Vector2d::Zero(), indefinite), ValidationError);

  CHECK_THROWS_AS(GaussianJoint({"u", "v"}, Eigen::Vector3d::Zero(), Eigen::MatrixXd::Identity(2, 2)),
                  ValidationError);
  CHECK_THROWS_AS(GaussianJoint({"u", "u"}, Eigen::Vector2d::Zero(), Eigen::MatrixXd::Identity(2, 2)),
                  ValidationError);

  // An eigenvalue at -5e-11 is inside the clip band and comes out at zero.
  Eigen::MatrixXd nearly(2, 2);
  nearly << 1.0, 1.0, 1.0, 1.0 - 1e-10;
  const GaussianJoint clipped({"u", "v"}, Eigen::Vector2d::Zero(), nearly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{clipped.covariance()};
  CHECK(es.eigenvalues().minCoeff() >= -1e-16);
}

TEST_CASE("the singular flag trips at the documented condition number") {
  auto joint_with_ratio = [](double lmin) {
    Eigen::MatrixXd cov = Eigen::Vector3d(1.0, lmin, 1.0).asDiagonal();
    return GaussianJoint({"u", "v", "t"}, Eigen::Vector3d::Zero(), cov);
  };
  CHECK_FALSE(condition(joint_with_ratio(1e-10), "t", {"u", "v"}).singular_conditioning);
  CHECK(condition(joint_with_ratio(1e-13), "t", {"u", "v"}).singular_conditioning);
}

TEST_CASE("singular conditioning falls back to the minimum-norm solution") {
  // A pure strategy makes (theta, a) perfectly collinear.
  const auto s = Scenario::main(0.5, 0.5, 1.0, 1.0, 1.0);
  const auto joint = objective_joint(s, {0.0, 1.0, 0.0});
  const LinearConditional c = condition(joint, "x", {"theta", "a"});
  CHECK(c.singular_conditioning);
  // Minimum-norm solution splits the unit total effect across the two
  // collinear regressors while reproducing the conditional mean on the
  // support: theta + a coefficients sum to the total effect 1 - gamma.
  CHECK_THAT(c.coefficients(0) + c.coefficients(1), WithinAbs(0.5, 1e-9));

  CHECK_THROWS_AS(condition(joint, "x", {"x"}), ValidationError);
  CHECK_THROWS_AS(condition(joint, "zz", {"theta"}), UnknownNodeError);
}
