#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "cogdyn/arm.hpp"
#include "cogdyn/errors.hpp"
#include "cogdyn/shaping_fit.hpp"
#include "oracles.hpp"

using namespace cogdyn;

namespace {

// Shared across tests: one modest training set and its fit.
struct Trained {
  SampleSet set = generate_samples(4000, 11);
  std::vector<EnergyGroups> rows = evaluate_samples(set);
  FitReport report = fit_coefficients(rows);
};

const Trained& trained() {
  static const Trained t;
  return t;
}

ArmModel uniform_arm(int n, double L0, double r, double mass, double l_max) {
  ArmModel m;
  for (int i = 0; i < n; ++i) {
    SectionParams s = oracle::prototype_section();
    s.L0 = L0;
    s.r = r;
    s.mass = mass;
    s.l_max = l_max;
    m.sections.push_back(s);
  }
  return m;
}

const Arm& prototype_arm10() {
  static const Arm arm(uniform_arm(10, 0.15, 0.0125, 0.1, 0.07));
  return arm;
}

}  // namespace

TEST(Sampling, SameSeedGivesIdenticalSets) {
  const SampleSet a = generate_samples(500, 42), b = generate_samples(500, 42);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t n = 0; n < a.samples.size(); ++n) {
    EXPECT_EQ(a.samples[n].r, b.samples[n].r);
    EXPECT_EQ(a.samples[n].l_max, b.samples[n].l_max);
    EXPECT_EQ(a.samples[n].q, b.samples[n].q);
    EXPECT_EQ(a.samples[n].qdot, b.samples[n].qdot);
    EXPECT_EQ(a.samples[n].omega, b.samples[n].omega);
  }
  const SampleSet c = generate_samples(500, 43);
  EXPECT_NE(a.samples[0].q, c.samples[0].q);
}

TEST(Sampling, RespectsTheNormalizedBounds) {
  const double L0 = 0.15;
  for (const ShapingSample& s : generate_samples(5000, 3, L0).samples) {
    const double alpha_r = s.r / L0, alpha_l = s.l_max / L0;
    EXPECT_GE(alpha_r, 1.0 / 20.0);
    EXPECT_LE(alpha_r, 0.5);
    EXPECT_GE(alpha_l, 1.0 / 20.0 - 1e-15);
    EXPECT_LE(alpha_l, 6.0 * std::numbers::pi * alpha_r + 1e-12);
    for (int j = 0; j < 3; ++j) {
      EXPECT_GE(s.q(j), 0.0);
      EXPECT_LE(s.q(j), s.l_max);
      EXPECT_GE(s.qdot(j), 0.0);
      EXPECT_LE(s.qdot(j), L0);
      EXPECT_LE(std::abs(s.omega(j)), 100.0);
    }
  }
}

TEST(Sampling, RejectsNonPositiveLength) { EXPECT_THROW(generate_samples(10, 1, 0.0), ValidationError); }

TEST(Evaluation, GroupsRecombineToSectionEnergies) {
  // The weighted groups must add up to the disc-integral and CoG energies of
  // a lone section spun by the sampled predecessor velocity.
  const SampleSet set = generate_samples(20, 5);
  const std::vector<EnergyGroups> rows = evaluate_samples(set);
  for (std::size_t n = 0; n < set.samples.size(); ++n) {
    const ShapingSample& s = set.samples[n];
    const ExactSection shape(s.L0, s.r);
    BodyVelocity prev;
    prev.Omega = skew(s.omega);
    const KineticEnergy integral = section_kinetic_integral(shape, 1.0, s.q, s.qdot, prev);
    const KineticEnergy cog = section_kinetic_cog(shape, 1.0, s.q, s.qdot, prev, ShapingCoefficients::unscaled());
    EXPECT_LT(oracle::rel_err(rows[n].kinetic_integral(), integral.total(), 1e-12), 1e-11);
    EXPECT_LT(oracle::rel_err(rows[n].kinetic_cog(ShapingCoefficients::unscaled()), cog.total(), 1e-12), 1e-11);
  }
}

TEST(Evaluation, IndependentOfThreadCount) {
  const SampleSet set = generate_samples(3000, 9);
  const auto one = evaluate_samples(set, kDefaultQuadratureOrder, 1);
  const auto four = evaluate_samples(set, kDefaultQuadratureOrder, 4);
  ASSERT_EQ(one.size(), four.size());
  for (std::size_t n = 0; n < one.size(); ++n) {
    EXPECT_EQ(one[n].integral, four[n].integral);
    EXPECT_EQ(one[n].cog, four[n].cog);
  }
  const FitReport a = fit_coefficients(one), b = fit_coefficients(four);
  EXPECT_EQ(fit_report_json(a, FitMethod::per_term, 9), fit_report_json(b, FitMethod::per_term, 9));
}

TEST(Fit, RecoversAnExactScaleOfTwo) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<EnergyGroups> rows(200);
  for (EnergyGroups& r : rows)
    for (int g = 0; g < kResidualCount; ++g) {
      r.cog[g] = u(rng);
      r.integral[g] = 2.0 * r.cog[g];
    }
  const FitReport report = fit_coefficients(rows);
  for (int g = 0; g < kResidualCount; ++g) {
    EXPECT_NEAR(residual_beta(report.per_term, g), 2.0, 1e-14);
    EXPECT_NEAR(residual_beta(report.joint, g), 2.0, 1e-10);
    EXPECT_NEAR(residual_beta(report.clamped, g), 1.0, 1e-12);
  }
  EXPECT_LT(report.joint_objective.sum_squared, 1e-20);
}

TEST(Fit, PureExtensionSelfTermTendsToFourThirds) {
  // Straight extension: p = (0, 0, xi s), so the disc integral of |p'|^2 is
  // s'^2/3 while the CoG sees (s'/2)^2.
  SampleSet set;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 0; n < 400; ++n) {
    ShapingSample s;
    s.L0 = 0.15;
    s.r = 0.0125;
    s.l_max = 0.07;
    s.q.setConstant(0.07 * u(rng));
    s.qdot.setConstant(0.15 * u(rng));
    set.samples.push_back(s);
  }
  const FitReport report = fit_coefficients(evaluate_samples(set));
  EXPECT_NEAR(report.per_term.beta_v(2), 4.0 / 3.0, 1e-12);
  EXPECT_TRUE(report.determined[kResC]);
  EXPECT_FALSE(report.determined[kResA]);
  EXPECT_FALSE(report.determined[kResE]);
  EXPECT_EQ(report.per_term.beta_v(0), 1.0);
  EXPECT_EQ(report.per_term.beta_w(0), 1.0);
}

TEST(Fit, AllZeroGroupsAreRejected) {
  std::vector<EnergyGroups> rows(10);
  EXPECT_THROW(fit_coefficients(rows), NumericalError);
  EXPECT_THROW(fit_coefficients(std::vector<EnergyGroups>(3)), ValidationError);
}

TEST(Fit, ObjectiveOrderingOnTrainingSet) {
  const FitReport& r = trained().report;
  EXPECT_LE(r.joint_objective.sum_squared, r.unit_objective.sum_squared);
  EXPECT_LE(r.per_term_objective.sum_squared, r.unit_objective.sum_squared);
  EXPECT_LE(r.per_term_objective.mean_abs, r.unit_objective.mean_abs);
  EXPECT_LE(r.unit_objective.sum_squared, r.zero_objective.sum_squared);
  EXPECT_LE(r.joint_objective.sum_squared, r.per_term_objective.sum_squared * (1.0 + 1e-12));
  EXPECT_LE(r.clamped_objective.sum_squared, r.unit_objective.sum_squared * (1.0 + 1e-12));
}

TEST(Fit, ClampedFitStaysInTheUnitBox) {
  const ShapingCoefficients& c = trained().report.clamped;
  for (int g = 0; g < kResidualCount; ++g) {
    EXPECT_GE(residual_beta(c, g), 0.0);
    EXPECT_LE(residual_beta(c, g), 1.0);
  }
}

TEST(Fit, PerTermCoefficientsArePositive) {
  const ShapingCoefficients& c = trained().report.per_term;
  for (int g = 0; g < kResidualCount; ++g) EXPECT_GT(residual_beta(c, g), 0.0);
  // The round trip through the coefficient file keeps every bit.
  EXPECT_EQ(parse_coefficients(serialize_coefficients(c)), c);
}

TEST(Fit, MethodNamesRoundTrip) {
  EXPECT_EQ(parse_fit_method("joint"), FitMethod::joint);
  EXPECT_EQ(parse_fit_method("per-term"), FitMethod::per_term);
  EXPECT_EQ(to_string(FitMethod::per_term), "per-term");
  EXPECT_THROW(parse_fit_method("lasso"), ValidationError);
}

TEST(Validation, RestStateHasZeroError) {
  const Arm arm(uniform_arm(1, 0.15, 0.0125, 0.1, 0.07));
  const ValidationStats s =
      validate_states(trained().report.per_term, arm, {VecX::Zero(3)}, {VecX::Zero(3)});
  ASSERT_EQ(s.count, 1u);
  EXPECT_EQ(s.normalized_errors[0], 0.0);
  EXPECT_EQ(s.mean_abs_error, 0.0);
}

TEST(Validation, FittedCoefficientsBeatUnscaled) {
  const ValidationStats fitted = validate_coefficients(trained().report.per_term, prototype_arm10(), 300, 21);
  const ValidationStats unit = validate_coefficients(ShapingCoefficients::unscaled(), prototype_arm10(), 300, 21);
  EXPECT_EQ(fitted.max_kinetic, unit.max_kinetic);
  EXPECT_LT(fitted.mean_abs_error, 0.5 * unit.mean_abs_error);
  EXPECT_LT(fitted.mean_abs_error, 1e-3);
}

TEST(Validation, DeterministicAcrossThreadCounts) {
  const auto& c = trained().report.per_term;
  const ValidationStats a = validate_coefficients(c, prototype_arm10(), 200, 4, kDefaultQuadratureOrder, 1);
  const ValidationStats b = validate_coefficients(c, prototype_arm10(), 200, 4, kDefaultQuadratureOrder, 3);
  EXPECT_EQ(a.normalized_errors, b.normalized_errors);
  EXPECT_EQ(validation_json(a, c, 4), validation_json(b, c, 4));
}

TEST(Validation, ErrorScaleIsArmIndependent) {
  // Keep l_max / r at or below the prototype's so the sections certify.
  const Arm small(uniform_arm(4, 0.10, 0.010, 0.05, 0.05));
  const Arm large(uniform_arm(4, 0.20, 0.020, 0.30, 0.10));
  const auto& c = trained().report.per_term;
  const double e_small = validate_coefficients(c, small, 300, 8).mean_abs_error;
  const double e_large = validate_coefficients(c, large, 300, 8).mean_abs_error;
  EXPECT_GT(e_small, 0.0);
  EXPECT_GT(e_large, 0.0);
  EXPECT_LT(std::max(e_small, e_large) / std::min(e_small, e_large), 10.0);
}

TEST(Validation, StatesMustMatchTheArm) {
  const Arm arm(uniform_arm(1, 0.15, 0.0125, 0.1, 0.07));
  EXPECT_THROW(validate_states(ShapingCoefficients::unscaled(), arm, {VecX::Zero(3)}, {}), ValidationError);
  EXPECT_THROW(validate_states(ShapingCoefficients::unscaled(), arm, {VecX::Zero(6)}, {VecX::Zero(6)}),
               ValidationError);
}

TEST(Histogram, CountsEveryValueOnce) {
  const std::vector<double> values{-1.0, -0.5, 0.0, 0.25, 0.5, 1.0};
  const auto bins = histogram(values, 4);
  ASSERT_EQ(bins.size(), 4u);
  std::size_t total = 0;
  for (const HistogramBin& b : bins) total += b.count;
  EXPECT_EQ(total, values.size());
  EXPECT_DOUBLE_EQ(bins.front().lo, -1.0);
  EXPECT_DOUBLE_EQ(bins.back().hi, 1.0);
  EXPECT_EQ(bins.back().count, 2u);  // the maximum lands in the last bin

  std::istringstream csv(histogram_csv(bins));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "bin_lo,bin_hi,count");
  int lines = 0;
  for (std::string line; std::getline(csv, line);) ++lines;
  EXPECT_EQ(lines, 4);
}

TEST(Histogram, DegenerateInputs) {
  EXPECT_TRUE(histogram({}, 5).empty());
  const auto flat = histogram({0.0, 0.0, 0.0}, 3);
  std::size_t total = 0;
  for (const HistogramBin& b : flat) total += b.count;
  EXPECT_EQ(total, 3u);
  EXPECT_THROW(histogram({1.0}, 0), ValidationError);
}
