#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cogdyn/chain.hpp"
#include "cogdyn/quadrature.hpp"

namespace cogdyn {

// Energy shaping coefficients. Index 0 scales the predecessor-spin groups,
// index 1 the cross groups and index 2 the self-rate groups, separately for
// the angular (w) and linear (v) kinetic energy.
struct ShapingCoefficients {
  Vec3 beta_w = Vec3::Ones();
  Vec3 beta_v = Vec3::Ones();

  static ShapingCoefficients unscaled() { return {}; }
  bool operator==(const ShapingCoefficients&) const = default;
};

ShapingCoefficients parse_coefficients(std::string_view json_text);
ShapingCoefficients load_coefficients(const std::filesystem::path& path);
std::string serialize_coefficients(const ShapingCoefficients& c);

struct KineticEnergy {
  double K_w = 0.0;
  double K_v = 0.0;
  double total() const { return K_w + K_v; }
};

double total_kinetic(const std::vector<KineticEnergy>& sections);

// Thin-disc inertia about a diameter.
inline double disc_inertia(double mass, double r) { return 0.25 * mass * r * r; }

// Single-section energies driven by the predecessor tip velocity `prev`.
KineticEnergy section_kinetic_integral(const SectionShape& shape, double mass, const Vec3& qi, const Vec3& rate,
                                       const BodyVelocity& prev, int quad_order = kDefaultQuadratureOrder);
KineticEnergy section_kinetic_cog(const SectionShape& shape, double mass, const Vec3& qi, const Vec3& rate,
                                  const BodyVelocity& prev, const ShapingCoefficients& coeffs);

std::vector<KineticEnergy> kinetic_integral(const Arm& arm, const VecX& q, const VecX& qdot,
                                            int quad_order = kDefaultQuadratureOrder);
std::vector<KineticEnergy> kinetic_cog(const Arm& arm, const VecX& q, const VecX& qdot,
                                       const ShapingCoefficients& coeffs);

// The six residual groups, each as (integral, CoG):
//   a: p^T W^T W p      b: p^T W^T p'      c: p'^T p'
//   d: T2(R'^T R')      e: 2 T2(R^T W^T W R)      f: T2(R'^T W R)
// with W the predecessor angular velocity matrix and primes time rates.
enum Residual { kResA, kResB, kResC, kResD, kResE, kResF, kResidualCount };

struct ResidualPair {
  double integral = 0.0;
  double cog = 0.0;
};
using ResidualTerms = std::array<ResidualPair, kResidualCount>;

ResidualTerms energy_residual_terms(const SectionShape& shape, const Vec3& qi, const Vec3& rate, const Mat3& Omega_prev,
                                    int quad_order = kDefaultQuadratureOrder);
ResidualTerms energy_residual_terms(const Arm& arm, const VecX& q, const VecX& qdot, int i,
                                    int quad_order = kDefaultQuadratureOrder);

// Multipliers that turn residual groups into energies: the section energy
// difference is sum_k weight_k (integral_k - beta_k cog_k), where beta_k is the
// coefficient attached to group k.
std::array<double, kResidualCount> residual_weights(double mass, double r);
double residual_beta(const ShapingCoefficients& c, int k);

struct Potential {
  std::vector<double> gravity;
  std::vector<double> elastic;
  double total() const;
};

// Gravity uses the CoG position, -m g^T p̄^i with g the gravitational
// acceleration; this equals the integral model's xi-averaged value exactly.
Potential potential(const Arm& arm, const VecX& q);

}  // namespace cogdyn
