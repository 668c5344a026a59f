#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <random>

#include <revcausal/belief.hpp>
#include <revcausal/scm.hpp>

#include "oracles.hpp"

using Catch::Matchers::WithinAbs;
using namespace revcausal;

namespace {

std::vector<Scenario> one_per_family() {
  return {Scenario::main(0.5, 0.25, 1.0, 2.0, 1.0),
          Scenario::exogeneity_only(0.4, 0.6, 0.3, 1.5, 1.0, 0.5),
          Scenario::reverse_only(0.75, 0.5, 1.0, 0.5, 2.0)};
}

}  // namespace

TEST_CASE("fitting the true DAG recovers the structural equations") {
  const auto s = Scenario::main(0.6, 0.3, 1.0, 1.5, 0.75);
  const auto joint = objective_joint(s, {0.0, 0.4, s.default_tremble()});
  const FittedModel m = fit(joint, true_dag(s));

  const auto& fx = m.factor("x");  // parents (theta, a)
  CHECK_THAT(fx.coefficients(0), WithinAbs(1.0, 1e-8));
  CHECK_THAT(fx.coefficients(1), WithinAbs(-0.6, 1e-8));
  CHECK_THAT(fx.residual_variance, WithinAbs(1.5, 1e-8));

  const auto& fy = m.factor("y");  // parents (a, x)
  CHECK_THAT(fy.coefficients(0), WithinAbs(-0.3, 1e-9));
  CHECK_THAT(fy.coefficients(1), WithinAbs(1.0, 1e-9));
  CHECK_THAT(fy.residual_variance, WithinAbs(0.75, 1e-9));
}

TEST_CASE("fitting the subjective DAG treats y as a root") {
  const auto s = Scenario::main(0.5, 0.5, 1.0, 1.0, 1.0);
  const auto joint = objective_joint(s, {0.0, 2.0 / 3.0, s.default_tremble()});
  const FittedModel m = fit(joint, subjective_dag(s));

  const auto& fy = m.factor("y");
  CHECK(fy.given.empty());
  CHECK_THAT(fy.intercept, WithinAbs(0.0, 1e-12));
  CHECK_THAT(fy.residual_variance, WithinAbs(joint.variance_of("y"), 1e-12));
  CHECK(m.factor("x").given == std::vector<std::string>{"theta", "a", "y"});
}

TEST_CASE("fitting a fully independent joint yields zero coefficients") {
  Eigen::MatrixXd cov = Eigen::Vector4d(1.0, 2.0, 0.5, 1.5).asDiagonal();
  const GaussianJoint joint(canonical_variables(), Eigen::Vector4d::Zero(), cov);
  const FittedModel m = fit(joint, subjective_dag(Scenario::main(0.5, 0.5, 1, 1, 1)));
  for (const auto& f : m.factors) {
    if (f.coefficients.size() > 0) CHECK(f.coefficients.cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("fit-compose is the identity on the true factorization") {
  for (const auto& s : one_per_family()) {
    const auto joint = objective_joint(s, {0.1, 0.4, s.default_tremble()});
    const GaussianJoint back = compose(fit(joint, true_dag(s)));
    CHECK((back.covariance() - joint.covariance()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((back.mean() - joint.mean()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("refitting a composed model reproduces its factors") {
  const auto s = Scenario::reverse_only(0.5, 0.5, 1.0, 2.0, 1.0);
  const auto joint = objective_joint(s, {0.0, 0.5, s.default_tremble()});
  const FittedModel fitted = fit(joint, subjective_dag(s));
  const GaussianJoint composed = compose(fitted);
  const FittedModel refit = fit(composed, subjective_dag(s));
  for (std::size_t i = 0; i < fitted.factors.size(); ++i) {
    const auto& f0 = fitted.factors[i];
    const auto& f1 = refit.factors[i];
    CHECK_THAT(f1.intercept, WithinAbs(f0.intercept, 1e-9));
    CHECK_THAT(f1.residual_variance, WithinAbs(f0.residual_variance, 1e-9));
    for (Eigen::Index j = 0; j < f0.coefficients.size(); ++j) {
      CHECK_THAT(f1.coefficients(j), WithinAbs(f0.coefficients(j), 1e-9));
    }
  }
}

TEST_CASE("composed subjective model under Main decorrelates y from theta and a") {
  const auto s = Scenario::main(0.5, 0.25, 1.0, 1.0, 1.0);
  const auto joint = objective_joint(s, {0.0, 0.5, s.default_tremble()});
  const GaussianJoint composed = compose(fit(joint, subjective_dag(s)));
  CHECK(composed.covariance_of("y", "theta") == 0.0);
  CHECK(composed.covariance_of("y", "a") == 0.0);
}

TEST_CASE("composition preserves means everywhere and variances off the distorted node") {
  const auto s = Scenario::main(0.5, 0.25, 1.0, 2.0, 1.0);
  const auto joint = objective_joint(s, {0.2, 0.5, s.default_tremble()});
  const GaussianJoint composed = compose(fit(joint, subjective_dag(s)));
  for (const auto& v : joint.variables()) {
    CHECK_THAT(composed.mean_of(v), WithinAbs(joint.mean_of(v), 1e-9));
  }
  for (const auto& v : {"theta", "a", "y"}) {
    CHECK_THAT(composed.variance_of(v), WithinAbs(joint.variance_of(v), 1e-9));
  }
}

TEST_CASE("subjective variance of x is genuinely distorted") {
  // lambda = gamma = 0, a = theta, unit variances: objectively var(x) = 2,
  // but the composed subjective model yields 1.5.
  const auto s = Scenario::main(0.0, 0.0, 1.0, 1.0, 1.0);
  const auto joint = objective_joint(s, {0.0, 1.0, s.default_tremble()});
  const GaussianJoint composed = compose(fit(joint, subjective_dag(s)));
  CHECK_THAT(joint.variance_of("x"), WithinAbs(2.0, 1e-6));
  CHECK_THAT(composed.variance_of("x"), WithinAbs(1.5, 1e-6));
  CHECK(std::abs(composed.variance_of("x") - joint.variance_of("x")) > 0.3);
}

TEST_CASE("composed variance matches a simulation of the fitted process", "[oracle]") {
  const auto s = Scenario::main(0.0, 0.0, 1.0, 1.0, 1.0);
  const auto joint = objective_joint(s, {0.0, 1.0, s.default_tremble()});
  const FittedModel fitted = fit(joint, subjective_dag(s));
  const double sampled = oracle::sampled_composed_variance(fitted, "x", 2'000'000, 11);
  CHECK_THAT(compose(fitted).variance_of("x"), WithinAbs(sampled, 1e-2));
}

TEST_CASE("subjective conditional matches the derived coefficients") {
  const auto s = Scenario::main(0.5, 0.5, 1.0, 1.0, 1.0);  // beta = 1/2
  const auto joint = objective_joint(s, {0.0, 0.9, s.default_tremble()});
  const SubjectiveBelief belief = subjective_conditional(s, joint);
  CHECK(belief.conditional_x.given == std::vector<std::string>{"theta", "a"});
  CHECK_THAT(belief.conditional_x.coefficients(0), WithinAbs(0.5, 1e-8));
  CHECK_THAT(belief.conditional_x.coefficients(1), WithinAbs(0.0, 1e-8));
  CHECK_THAT(belief.conditional_x.intercept, WithinAbs(0.0, 1e-10));
}

TEST_CASE("subjective conditional coefficients across the parameter grid") {
  for (double g : {0.0, 0.5, 1.0}) {
    for (double l : {0.0, 0.5, 1.0}) {
      for (double ve : {0.5, 1.0, 2.0}) {
        for (double vh : {0.5, 2.0}) {
          const auto s = Scenario::main(g, l, 1.0, ve, vh);
          const double beta = s.beta();
          for (double trembles : {1e-3, 1e-5, 1e-7}) {
            const auto joint = objective_joint(s, {0.0, 0.4, trembles * s.var_theta()});
            const auto belief = subjective_conditional(s, joint);
            CHECK_THAT(belief.conditional_x.coefficients(0), WithinAbs(1.0 - beta, 1e-6));
            CHECK_THAT(belief.conditional_x.coefficients(1),
                       WithinAbs(beta * l + beta * g - g, 1e-6));
          }
        }
      }
    }
  }
}

TEST_CASE("exogeneity-only subjective conditional") {
  const auto s = Scenario::exogeneity_only(0.5, 0.5, 0.5, 1.0, 1.0, 1.0);
  const auto joint = objective_joint(s, {0.0, 0.3, s.default_tremble()});
  const auto belief = subjective_conditional(s, joint);
  CHECK_THAT(belief.conditional_x.coefficients(0), WithinAbs(1.0, 1e-9));
  CHECK_THAT(belief.conditional_x.coefficients(1), WithinAbs(-0.5, 1e-9));
  CHECK_THAT(belief.conditional_x.intercept, WithinAbs(0.0, 1e-12));

  // With a strategy intercept, the conditional picks up alpha * E(y).
  const auto joint_b = objective_joint(s, {0.8, 0.3, s.default_tremble()});
  const auto belief_b = subjective_conditional(s, joint_b);
  CHECK_THAT(belief_b.conditional_x.intercept, WithinAbs(0.5 * 0.5 * 0.8, 1e-9));
}

TEST_CASE("degenerate x-equation noise recovers the true conditional") {
  const auto s = Scenario::main(0.5, 0.5, 1.0, 0.0, 1.0);  // beta = 0
  const auto joint = objective_joint(s, {0.0, 0.4, s.default_tremble()});
  const auto belief = subjective_conditional(s, joint);
  CHECK_THAT(belief.conditional_x.coefficients(0), WithinAbs(1.0, 1e-8));
  CHECK_THAT(belief.conditional_x.coefficients(1), WithinAbs(-0.5, 1e-8));
}

TEST_CASE("reverse-only belief keeps the fitted y-given-a factor") {
  const auto s = Scenario::reverse_only(0.5, 0.5, 1.0, 1.0, 1.0);
  const double k = 0.7;
  const auto joint = objective_joint(s, {0.0, k, s.default_tremble()});
  const auto belief = subjective_conditional(s, joint);

  // In the composed model, the y factor equals the objective regression of y
  // on a, so conditioning x on (theta, a) picks up c2 + c3 * slope(y|a)
  // = -gamma + beta * cov(theta,a)/var(a).
  const double beta = s.beta();
  const double r = joint.covariance_of("theta", "a") / joint.variance_of("a");
  CHECK_THAT(belief.conditional_x.coefficients(0), WithinAbs(1.0 - beta, 1e-8));
  CHECK_THAT(belief.conditional_x.coefficients(1), WithinAbs(-s.gamma() + beta * r, 1e-8));

  const auto fitted_y = fit(joint, subjective_dag(s)).factor("y");
  const auto composed_y = fit(belief.joint, subjective_dag(s)).factor("y");
  CHECK_THAT(composed_y.coefficients(0), WithinAbs(fitted_y.coefficients(0), 1e-9));
}
