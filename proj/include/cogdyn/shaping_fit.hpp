#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cogdyn/energy.hpp"

namespace cogdyn {

// One normalized-geometry sample for coefficient fitting. The predecessor
// angular velocity is skew(omega); its linear velocity does not enter the
// residual groups.
struct ShapingSample {
  double L0 = 0.0;
  double r = 0.0;
  double l_max = 0.0;
  Vec3 q = Vec3::Zero();
  Vec3 qdot = Vec3::Zero();
  Vec3 omega = Vec3::Zero();
};

struct SampleSet {
  std::uint64_t seed = 0;
  std::vector<ShapingSample> samples;
};

// Uniform draws with alpha_r = r/L0 in [1/20, 1/2], alpha_l = l_max/L0 in
// [1/20, 6 pi alpha_r], q in [0, l_max]^3, qdot in [0, L0]^3 and predecessor
// spin components in [-100, 100] rad/s. Bit-reproducible from the seed.
SampleSet generate_samples(std::size_t count, std::uint64_t seed, double L0 = 0.15);

// Residual groups of one sample already multiplied by their energy weights,
// so that K_int = sum(integral) and K_cog(beta) = sum_k beta_k cog_k.
struct EnergyGroups {
  std::array<double, kResidualCount> integral{};
  std::array<double, kResidualCount> cog{};
  double kinetic_integral() const;
  double kinetic_cog(const ShapingCoefficients& c) const;
};

// Evaluates every sample with closed-form section kinematics (the sampled
// bending range exceeds any certifiable polynomial order). Work is split in
// fixed chunks and written by index, so the result is independent of
// `threads` (0 = hardware concurrency).
std::vector<EnergyGroups> evaluate_samples(const SampleSet& set, int quad_order = kDefaultQuadratureOrder,
                                           int threads = 0);

enum class FitMethod { joint, per_term };
FitMethod parse_fit_method(const std::string& name);
std::string to_string(FitMethod m);

struct FitObjective {
  double sum_squared = 0.0;  // sum over samples of (K_int - K_cog)^2
  double mean_abs = 0.0;     // mean |K_int - K_cog| / max K_int
  double max_abs = 0.0;      // max |K_int - K_cog| / max K_int
};

FitObjective evaluate_objective(const std::vector<EnergyGroups>& rows, const ShapingCoefficients& c);

struct FitReport {
  std::size_t sample_count = 0;
  ShapingCoefficients joint;     // least squares on the total energy gap
  ShapingCoefficients per_term;  // slope of each integral-vs-CoG scatter through the origin
  ShapingCoefficients clamped;   // joint fit restricted to [0, 1]
  std::array<bool, kResidualCount> determined{};  // group nonzero somewhere in the data
  FitObjective joint_objective, per_term_objective, clamped_objective, unit_objective, zero_objective;

  const ShapingCoefficients& coefficients(FitMethod m) const { return m == FitMethod::joint ? joint : per_term; }
};

// Groups that vanish on every sample keep coefficient 1. Throws
// NumericalError only when all of them vanish.
FitReport fit_coefficients(const std::vector<EnergyGroups>& rows);

std::string fit_report_json(const FitReport& report, FitMethod chosen, std::uint64_t seed);

// Energy agreement of the whole arm over random states with q in
// [0, l_max] and qdot in [-L0, L0]. Errors are normalized by the largest
// integral energy in the set.
struct ValidationStats {
  std::size_t count = 0;
  double max_kinetic = 0.0;
  double mean_error = 0.0;      // signed
  double mean_abs_error = 0.0;
  double max_abs_error = 0.0;
  std::vector<double> normalized_errors;
};

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

ValidationStats validate_coefficients(const ShapingCoefficients& c, const Arm& arm, std::size_t count,
                                      std::uint64_t seed, int quad_order = kDefaultQuadratureOrder, int threads = 0);
ValidationStats validate_states(const ShapingCoefficients& c, const Arm& arm, const std::vector<VecX>& qs,
                                const std::vector<VecX>& qds, int quad_order = kDefaultQuadratureOrder,
                                int threads = 0);
std::vector<HistogramBin> histogram(const std::vector<double>& values, int bins);
std::string histogram_csv(const std::vector<HistogramBin>& bins);
std::string validation_json(const ValidationStats& s, const ShapingCoefficients& c, std::uint64_t seed);

// Deterministic worker pool helper: calls body(begin, end) on fixed chunks.
void parallel_chunks(std::size_t count, std::size_t chunk, int threads,
                     const std::function<void(std::size_t, std::size_t)>& body);

// Uniform double in [0, 1) from the top 53 bits, identical on every platform.
inline double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

}  // namespace cogdyn
