#include <gtest/gtest.h>

#include <random>

#include "cogdyn/cog.hpp"
#include "cogdyn/energy.hpp"
#include "cogdyn/errors.hpp"
#include "oracles.hpp"

using namespace cogdyn;

namespace {

const SectionParams kProto = oracle::prototype_section();

BodyVelocity spin_about_z(double wz) {
  BodyVelocity v;
  v.Omega = skew(Vec3(0, 0, wz));
  return v;
}

}  // namespace

TEST(Trace2, FirstTwoDiagonalEntries) {
  EXPECT_EQ(trace2(Mat3::Identity()), 2.0);
  EXPECT_EQ(trace2(Vec3(3.0, -5.0, 7.0).asDiagonal()), -2.0);
}

TEST(Trace2, DiscInertiaIdentity) {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(-3, 3);
  const double Ixx = disc_inertia(kProto.mass, kProto.r);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 w(u(rng), u(rng), u(rng));
    const Mat3 W = skew(w);
    EXPECT_NEAR(trace2(W.transpose() * W), w(0) * w(0) + w(1) * w(1) + 2 * w(2) * w(2), 1e-12);
    const double lhs = 0.5 * Ixx * trace2(W.transpose() * W);
    const double rhs = 0.5 * w.dot(Vec3(Ixx, Ixx, 2 * Ixx).asDiagonal() * w);
    EXPECT_NEAR(lhs, rhs, 1e-15);
  }
}

TEST(Kinetic, AtRestBothModelsVanish) {
  const Arm arm(oracle::test_arm(3));
  std::mt19937_64 rng(72);
  const VecX q = oracle::random_q(arm.model(), rng);
  EXPECT_EQ(total_kinetic(kinetic_integral(arm, q, VecX::Zero(9))), 0.0);
  EXPECT_EQ(total_kinetic(kinetic_cog(arm, q, VecX::Zero(9), ShapingCoefficients::unscaled())), 0.0);
}

TEST(Kinetic, SpinningStraightSectionMatchesTheDiscFormula) {
  const Arm arm(oracle::test_arm(1, false));
  const double wz = 2.5;
  const double expected = 0.25 * kProto.mass * kProto.r * kProto.r * wz * wz;
  const KineticEnergy integral =
      section_kinetic_integral(arm.shape(0), kProto.mass, Vec3::Zero(), Vec3::Zero(), spin_about_z(wz));
  EXPECT_NEAR(integral.K_w, expected, 1e-18);
  EXPECT_EQ(integral.K_v, 0.0);
  const KineticEnergy cog =
      section_kinetic_cog(arm.shape(0), kProto.mass, Vec3::Zero(), Vec3::Zero(), spin_about_z(wz), ShapingCoefficients::unscaled());
  EXPECT_NEAR(cog.K_w, expected, 1e-18);
  EXPECT_EQ(cog.K_v, 0.0);

  // Only the predecessor-spin group survives, so scaling multiplies by its coefficient.
  ShapingCoefficients c;
  c.beta_w = Vec3(0.8, 0.3, 0.2);
  c.beta_v = Vec3(0.5, 0.5, 0.5);
  const KineticEnergy scaled = section_kinetic_cog(arm.shape(0), kProto.mass, Vec3::Zero(), Vec3::Zero(), spin_about_z(wz), c);
  EXPECT_NEAR(scaled.K_w, 0.8 * expected, 1e-18);
  EXPECT_EQ(scaled.K_v, 0.0);
}

TEST(Kinetic, SpinningStraightSectionCogFrameInheritsTheSpin) {
  const Arm arm(oracle::test_arm(1, false));
  const SectionDerivs c = cog_section(arm.shape(0), Vec3::Zero());
  const BodyVelocity prev = spin_about_z(2.5);
  const Mat3 Omega_bar = c.R.transpose() * (prev.Omega * c.R);
  const Vec3 upsilon_bar = c.R.transpose() * (prev.upsilon + prev.Omega * c.p);
  EXPECT_EQ(Omega_bar, prev.Omega);
  EXPECT_EQ(upsilon_bar.norm(), 0.0);
}

TEST(Kinetic, PureExtensionRatioIsFourThirds) {
  const Arm arm(oracle::test_arm(1, false));
  const double sdot = 0.12;
  const VecX q = VecX::Constant(3, 0.02), qd = VecX::Constant(3, sdot);
  const KineticEnergy integral = kinetic_integral(arm, q, qd)[0];
  const KineticEnergy cog = kinetic_cog(arm, q, qd, ShapingCoefficients::unscaled())[0];
  EXPECT_NEAR(integral.K_v, 0.5 * kProto.mass * sdot * sdot / 3.0, 1e-17);
  EXPECT_NEAR(cog.K_v, 0.5 * kProto.mass * sdot * sdot / 4.0, 1e-17);
  EXPECT_NEAR(integral.K_w, 0.0, 1e-20);

  const ResidualTerms t = energy_residual_terms(arm, q, qd, 0);
  EXPECT_NEAR(t[kResC].integral, sdot * sdot / 3.0, 1e-15);
  EXPECT_NEAR(t[kResC].cog, sdot * sdot / 4.0, 1e-15);
}

TEST(Kinetic, IntegralEnergyIsNonNegative) {
  const Arm arm(oracle::test_arm(3));
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 100; ++trial)
    for (const KineticEnergy& k :
         kinetic_integral(arm, oracle::random_q(arm.model(), rng), oracle::random_qdot(arm.model(), rng))) {
      EXPECT_GE(k.K_w, -1e-12);
      EXPECT_GE(k.K_v, -1e-12);
    }
}

TEST(Kinetic, IntegralEnergyMatchesIndependentQuadrature) {
  const Arm arm(oracle::test_arm(2));
  std::mt19937_64 rng(74);
  const VecX q = oracle::random_q(arm.model(), rng).cwiseMax(0.001).cwiseMin(0.069);
  const VecX qd = oracle::random_qdot(arm.model(), rng);
  const double dt = 1e-6;
  // Energy of every disc from time differences of its world pose.
  double ref = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double m = arm.params(i).mass, Ixx = disc_inertia(m, arm.params(i).r);
    ref += oracle::integrate01(
        [&](double xi) {
          const SectionPose a = chain_pose(arm, q + dt * qd, i, xi), b = chain_pose(arm, q - dt * qd, i, xi);
          const SectionPose now = chain_pose(arm, q, i, xi);
          const Vec3 v = (a.p - b.p) / (2 * dt);
          const Vec3 w = vee(now.R.transpose() * (a.R - b.R) / (2 * dt));
          return 0.5 * m * v.squaredNorm() + 0.5 * w.dot(Vec3(Ixx, Ixx, 2 * Ixx).asDiagonal() * w);
        },
        32);
  }
  EXPECT_LT(oracle::rel_err(total_kinetic(kinetic_integral(arm, q, qd)), ref, 0.0), 1e-6);
}

TEST(Residuals, VanishWithoutMotion) {
  const ExactSection shape(kProto.L0, kProto.r);
  for (const ResidualPair& p : energy_residual_terms(shape, Vec3(0.01, 0.03, 0.02), Vec3::Zero(), Mat3::Zero())) {
    EXPECT_EQ(p.integral, 0.0);
    EXPECT_EQ(p.cog, 0.0);
  }
}

TEST(Residuals, WeightedRecombinationIsTheEnergyGap) {
  const ExactSection shape(kProto.L0, kProto.r);
  std::mt19937_64 rng(75);
  std::uniform_real_distribution<double> u(-1, 1);
  ShapingCoefficients c;
  c.beta_w = Vec3(0.7, 1.2, 0.9);
  c.beta_v = Vec3(1.1, 0.6, 1.3);
  const auto weight = residual_weights(kProto.mass, kProto.r);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 qi = 0.07 * Vec3(u(rng), u(rng), u(rng)).cwiseAbs();
    const Vec3 rate = 0.15 * Vec3(u(rng), u(rng), u(rng));
    BodyVelocity prev;
    prev.Omega = skew(5.0 * Vec3(u(rng), u(rng), u(rng)));
    prev.upsilon = Vec3(u(rng), u(rng), u(rng));
    const KineticEnergy integral = section_kinetic_integral(shape, kProto.mass, qi, rate, prev);
    const KineticEnergy cog = section_kinetic_cog(shape, kProto.mass, qi, rate, prev, c);
    const ResidualTerms t = energy_residual_terms(shape, qi, rate, prev.Omega);
    double gap = 0.0;
    for (int k = 0; k < kResidualCount; ++k) gap += weight[k] * (t[k].integral - residual_beta(c, k) * t[k].cog);
    EXPECT_NEAR(gap, integral.total() - cog.total(), 1e-12 * integral.total());
  }
}

TEST(Potential, UprightSectionLiftsItsMidpoint) {
  const Arm arm(oracle::test_arm(1, false));
  const Potential P = potential(arm, VecX::Zero(3));
  EXPECT_NEAR(P.gravity[0], 9.81 * kProto.mass * kProto.L0 / 2, 1e-15);
  EXPECT_EQ(P.elastic[0], 0.0);
}

TEST(Potential, CogGravityEqualsDistributedGravity) {
  const Arm arm(oracle::test_arm(3));
  std::mt19937_64 rng(76);
  for (int trial = 0; trial < 20; ++trial) {
    const VecX q = oracle::random_q(arm.model(), rng);
    const Potential P = potential(arm, q);
    for (int i = 0; i < 3; ++i) {
      const double m = arm.params(i).mass;
      const double ref = oracle::integrate01([&](double xi) { return -m * arm.gravity().dot(chain_pose(arm, q, i, xi).p); });
      EXPECT_NEAR(P.gravity[i], ref, 1e-10 * std::abs(ref));
    }
  }
}

TEST(Potential, ElasticEnergyIsTheSpringQuadraticForm) {
  const Arm arm(oracle::test_arm(2));
  VecX q(6);
  q << 0.01, 0.02, 0.03, 0.0, 0.05, 0.01;
  const Potential P = potential(arm, q);
  EXPECT_NEAR(P.elastic[0], 0.5 * 800 * (1e-4 + 4e-4 + 9e-4), 1e-14);
  EXPECT_NEAR(P.elastic[1], 0.5 * 800 * (25e-4 + 1e-4), 1e-14);
}

TEST(Coefficients, RoundTripIsExact) {
  ShapingCoefficients c;
  c.beta_w = Vec3(0.123456789012345678, 1.0 / 3.0, 2.5);
  c.beta_v = Vec3(1e-3, 0.75, 4.0 / 3.0);
  EXPECT_EQ(parse_coefficients(serialize_coefficients(c)), c);
}

TEST(Coefficients, RejectsNonPositiveAndMalformed) {
  EXPECT_THROW(parse_coefficients(R"({"beta_w": [1, 1, 0], "beta_v": [1, 1, 1]})"), ValidationError);
  EXPECT_THROW(parse_coefficients(R"({"beta_w": [1, 1], "beta_v": [1, 1, 1]})"), ValidationError);
  EXPECT_THROW(parse_coefficients(R"({"beta_v": [1, 1, 1]})"), ValidationError);
  EXPECT_THROW(parse_coefficients("not json"), ValidationError);
}
