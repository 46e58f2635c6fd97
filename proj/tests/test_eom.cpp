#include <gtest/gtest.h>

#include <random>

#include "cogdyn/eom.hpp"
#include "cogdyn/errors.hpp"
#include "oracles.hpp"

using namespace cogdyn;

namespace {

ShapingCoefficients skewed_coefficients() {
  ShapingCoefficients c;
  c.beta_w = Vec3(0.9, 0.7, 1.3);
  c.beta_v = Vec3(1.1, 0.8, 1.25);
  return c;
}

double cog_energy(const Arm& arm, const VecX& q, const VecX& qdot, const ShapingCoefficients& c) {
  return total_kinetic(kinetic_cog(arm, q, qdot, c));
}

// Christoffel symbols of the first kind from explicit partials of M.
MatX christoffel_coriolis(const std::vector<MatX>& dM, const VecX& qdot) {
  const int n = static_cast<int>(qdot.size());
  MatX C = MatX::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int h = 0; h < n; ++h) C(j, k) += 0.5 * (dM[h](j, k) + dM[k](j, h) - dM[j](k, h)) * qdot(h);
  return C;
}

class EomBySize : public ::testing::TestWithParam<int> {};

}  // namespace

TEST_P(EomBySize, HalfQuadraticFormIsTheScaledCogEnergy) {
  const Arm arm(oracle::test_arm(GetParam()));
  const ShapingCoefficients c = skewed_coefficients();
  CogDynamics dyn(arm, c);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const VecX q = oracle::random_q(arm.model(), rng);
    const VecX qd = oracle::random_qdot(arm.model(), rng);
    const MatX& M = dyn.inertia(q);
    EXPECT_LT(oracle::rel_err(0.5 * qd.dot(M * qd), cog_energy(arm, q, qd, c), 1e-300), 1e-10);
  }
}

TEST_P(EomBySize, InertiaIsSymmetricPositiveDefinite) {
  const Arm arm(oracle::test_arm(GetParam()));
  CogDynamics dyn(arm, skewed_coefficients());
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const MatX M = dyn.inertia(oracle::random_q(arm.model(), rng));
    EXPECT_LT((M - M.transpose()).norm() / M.norm(), 1e-10);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<MatX>(M).eigenvalues().minCoeff(), 0.0);
  }
}

TEST_P(EomBySize, UnscaledInertiaIsTheVelocityHessianOfEnergy) {
  const Arm arm(oracle::test_arm(GetParam()));
  std::mt19937_64 rng(13);
  const VecX q = oracle::random_q(arm.model(), rng);
  const MatX M = inertia_matrix(arm, q, ShapingCoefficients::unscaled());
  const int dof = arm.dof();
  const double h = 1e-3;
  MatX Hfd(dof, dof);
  const VecX v0 = oracle::random_qdot(arm.model(), rng);
  auto K = [&](const VecX& v) { return cog_energy(arm, q, v, ShapingCoefficients::unscaled()); };
  for (int a = 0; a < dof; ++a)
    for (int b = 0; b < dof; ++b) {
      VecX pp = v0, pm = v0, mp = v0, mm = v0;
      pp(a) += h, pp(b) += h;
      pm(a) += h, pm(b) -= h;
      mp(a) -= h, mp(b) += h;
      mm(a) -= h, mm(b) -= h;
      Hfd(a, b) = (K(pp) - K(pm) - K(mp) + K(mm)) / (4 * h * h);
    }
  EXPECT_LT(oracle::rel_err_mat(M, Hfd, 0.0), 1e-6);
}

TEST_P(EomBySize, InertiaPartialsMatchCentralDifferences) {
  const Arm arm(oracle::test_arm(GetParam()));
  CogDynamics dyn(arm, skewed_coefficients());
  std::mt19937_64 rng(14);
  const double step = 1e-6 * arm.params(0).L0;
  for (int trial = 0; trial < 50; ++trial) {
    VecX q = oracle::random_q(arm.model(), rng);
    q = q.cwiseMax(2 * step).cwiseMin(arm.params(0).l_max - 2 * step);
    const int h = std::uniform_int_distribution<int>(0, arm.dof() - 1)(rng);
    const MatX fd = oracle::central_diff([&](const VecX& x) { return MatX(dyn.inertia(x)); }, q, h, step);
    const MatX dM = dyn.inertia_partial(q, h);
    EXPECT_LT(oracle::rel_err_mat(dM, fd, 1e-12), 1e-5) << "h = " << h;
  }
}

TEST_P(EomBySize, CoriolisEqualsExplicitChristoffelSymbols) {
  const Arm arm(oracle::test_arm(GetParam()));
  CogDynamics dyn(arm, skewed_coefficients());
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const VecX q = oracle::random_q(arm.model(), rng);
    const VecX qd = oracle::random_qdot(arm.model(), rng);
    std::vector<MatX> dM;
    for (int h = 0; h < arm.dof(); ++h) dM.push_back(dyn.inertia_partial(q, h));
    const MatX C = dyn.assemble(q, qd).C;
    const MatX ref = christoffel_coriolis(dM, qd);
    EXPECT_LT(oracle::rel_err_mat(C, ref, 1e-14), 1e-10);
  }
}

TEST_P(EomBySize, MdotMinusTwoCIsSkewAlongVelocity) {
  const Arm arm(oracle::test_arm(GetParam()));
  CogDynamics dyn(arm, skewed_coefficients());
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 100; ++trial) {
    const VecX q = oracle::random_q(arm.model(), rng);
    const VecX qd = oracle::random_qdot(arm.model(), rng);
    MatX Mdot = MatX::Zero(arm.dof(), arm.dof());
    for (int h = 0; h < arm.dof(); ++h) Mdot += dyn.inertia_partial(q, h) * qd(h);
    const EomTerms& t = dyn.assemble(q, qd);
    const double residual = qd.dot((Mdot - 2.0 * t.C) * qd);
    EXPECT_LT(std::abs(residual) / (qd.squaredNorm() * t.M.norm()), 1e-8);
  }
}

// Lagrange's equations from finite differences of the energy alone:
// C qd = Mdot qd - dK/dq.
TEST_P(EomBySize, CoriolisForceMatchesLagrangeEquationsOfTheEnergy) {
  const Arm arm(oracle::test_arm(GetParam()));
  const ShapingCoefficients c = skewed_coefficients();
  CogDynamics dyn(arm, c);
  std::mt19937_64 rng(17);
  const double step = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    VecX q = oracle::random_q(arm.model(), rng).cwiseMax(1e-4).cwiseMin(0.069);
    const VecX qd = oracle::random_qdot(arm.model(), rng);
    const VecX Mdot_qd = (MatX(dyn.inertia(q + step * qd)) * qd - MatX(dyn.inertia(q - step * qd)) * qd) / (2 * step);
    VecX dKdq(arm.dof());
    for (int k = 0; k < arm.dof(); ++k)
      dKdq(k) = oracle::central_diff([&](const VecX& x) { return (VecX(1) << cog_energy(arm, x, qd, c)).finished(); },
                                     q, k, step)(0);
    const VecX Cqd = dyn.assemble(q, qd).C * qd;
    EXPECT_LT(oracle::rel_err_mat(Cqd, Mdot_qd - dKdq, 1e-9), 1e-5);
  }
}

TEST_P(EomBySize, ConservativeForceIsThePotentialGradient) {
  const Arm arm(oracle::test_arm(GetParam()));
  CogDynamics dyn(arm, skewed_coefficients());
  std::mt19937_64 rng(18);
  const double step = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const VecX q = oracle::random_q(arm.model(), rng).cwiseMax(2e-6).cwiseMin(0.07 - 2e-6);
    VecX fd(arm.dof());
    for (int k = 0; k < arm.dof(); ++k)
      fd(k) = oracle::central_diff([&](const VecX& x) { return (VecX(1) << potential(arm, x).total()).finished(); },
                                   q, k, step)(0);
    EXPECT_LT(oracle::rel_err_mat(dyn.gravity_elastic(q), fd, 1e-9), 1e-6);
  }
}

TEST_P(EomBySize, AssembleAgreesWithSeparateEvaluations) {
  const Arm arm(oracle::test_arm(GetParam()));
  const ShapingCoefficients c = skewed_coefficients();
  std::mt19937_64 rng(19);
  const VecX q = oracle::random_q(arm.model(), rng);
  const VecX qd = oracle::random_qdot(arm.model(), rng);
  const EomTerms t = assemble(arm, q, qd, c);
  EXPECT_LT((t.M - inertia_matrix(arm, q, c)).norm(), 1e-14 * t.M.norm());
  EXPECT_LT((t.G - gravity_elastic_vector(arm, q)).norm(), 1e-13 * t.G.norm());
  EXPECT_LT((t.C - coriolis_matrix(arm, q, qd, c)).norm(), 1e-14 * (1 + t.C.norm()));
  EXPECT_EQ(t.D, damping_matrix(arm));
}

TEST_P(EomBySize, ForwardDynamicsSolvesTheEquation) {
  const Arm arm(oracle::test_arm(GetParam()));
  CogDynamics dyn(arm, skewed_coefficients());
  std::mt19937_64 rng(20);
  for (int trial = 0; trial < 20; ++trial) {
    const VecX q = oracle::random_q(arm.model(), rng);
    const VecX qd = oracle::random_qdot(arm.model(), rng);
    const VecX tau = VecX::Random(arm.dof());
    const VecX qdd = dyn.forward_dynamics(q, qd, tau);
    const EomTerms& t = dyn.assemble(q, qd);
    const VecX lhs = t.M * qdd + (t.C + t.D) * qd + t.G;
    EXPECT_LT((lhs - tau).norm() / (1 + tau.norm() + t.G.norm()), 1e-10);
  }
}

TEST_P(EomBySize, HoldingTheConservativeForceIsAnEquilibrium) {
  const Arm arm(oracle::test_arm(GetParam()));
  CogDynamics dyn(arm, skewed_coefficients());
  std::mt19937_64 rng(21);
  const VecX q = oracle::random_q(arm.model(), rng);
  const VecX zero = VecX::Zero(arm.dof());
  const VecX qdd = dyn.forward_dynamics(q, zero, dyn.gravity_elastic(q));
  EXPECT_LT(qdd.norm(), 1e-10);
}

TEST_P(EomBySize, ZeroVelocityHasNoCoriolis) {
  const Arm arm(oracle::test_arm(GetParam()));
  std::mt19937_64 rng(22);
  const VecX q = oracle::random_q(arm.model(), rng);
  EXPECT_EQ(coriolis_matrix(arm, q, VecX::Zero(arm.dof()), skewed_coefficients()).norm(), 0.0);
}

INSTANTIATE_TEST_SUITE_P(Sections, EomBySize, ::testing::Values(1, 2, 3, 5));

TEST(Eom, DistalJointsOnlyCoupleThroughDistalSections) {
  // Section i contributes only to the leading 3(i+1) block, so with a lone
  // massive tip section removed, entries coupling the last section vanish.
  ArmModel model = oracle::test_arm(3);
  const Arm arm(model);
  std::mt19937_64 rng(23);
  const VecX q = oracle::random_q(model, rng);
  CogDynamics dyn(arm, skewed_coefficients());
  MatX total = dyn.inertia(q);

  ArmModel shorter = model;
  shorter.sections.pop_back();
  const Arm base(shorter);
  const MatX leading = inertia_matrix(base, q.head(6), skewed_coefficients());
  // The first two sections' contributions are the same in both arms.
  const MatX diff = total.topLeftCorner(6, 6) - leading;
  const MatX last_section = total - [&] {
    MatX padded = MatX::Zero(9, 9);
    padded.topLeftCorner(6, 6) = leading;
    return padded;
  }();
  EXPECT_LT((last_section - last_section.transpose()).norm(), 1e-14);
  EXPECT_GT(diff.norm(), 0.0);
  EXPECT_LT((last_section.topLeftCorner(6, 6) - diff).norm(), 1e-15);
}

TEST(Eom, StraightSingleSectionIsActuatorSymmetric) {
  ArmModel model = oracle::test_arm(1, false);
  const Arm arm(model);
  const MatX M = inertia_matrix(arm, VecX::Zero(3), ShapingCoefficients::unscaled());
  EXPECT_NEAR(M(0, 0), M(1, 1), 1e-15);
  EXPECT_NEAR(M(1, 1), M(2, 2), 1e-15);
  EXPECT_NEAR(M(0, 1), M(1, 2), 1e-15);
  EXPECT_NEAR(M(0, 1), M(0, 2), 1e-15);
}

TEST(Eom, NoGravityAtRestHasNoForce) {
  ArmModel model = oracle::test_arm(3);
  model.gravity = Vec3::Zero();
  const Arm arm(model);
  EXPECT_EQ(gravity_elastic_vector(arm, VecX::Zero(9)).norm(), 0.0);
}

TEST(Eom, StraightArmGravityPullsEveryActuatorEqually) {
  ArmModel model = oracle::test_arm(1, false);
  const Arm arm(model);
  const VecX G = gravity_elastic_vector(arm, VecX::Zero(3));
  // Extending all three actuators by dl raises the CoG by dl/6 against
  // gravity, so the conservative force resists extension.
  const double expected = arm.params(0).mass * 9.81 / 6.0;
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(G(j), expected, 1e-12);
}

TEST(Eom, UprightArmReleasedFromRestSags) {
  // Gravity along -Z on an arm pointing along +Z: with springs and damping
  // removed, every actuator must start to shorten at the same rate.
  ArmModel model = oracle::test_arm(1, false);
  model.sections[0].Ke.setZero();
  model.sections[0].D.setZero();
  const Arm arm(model);
  const VecX qdd = forward_dynamics(arm, VecX::Constant(3, 0.01), VecX::Zero(3), VecX::Zero(3),
                                    ShapingCoefficients::unscaled());
  for (int j = 0; j < 3; ++j) EXPECT_LT(qdd(j), 0.0);
  EXPECT_NEAR(qdd(0), qdd(1), 1e-9);
  EXPECT_NEAR(qdd(0), qdd(2), 1e-9);
}

TEST(Eom, ForwardDynamicsRejectsWrongSizes) {
  const Arm arm(oracle::test_arm(2));
  CogDynamics dyn(arm, ShapingCoefficients::unscaled());
  EXPECT_THROW(dyn.inertia_partial(VecX::Zero(6), 6), ValidationError);
}
