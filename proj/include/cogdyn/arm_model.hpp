#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cogdyn/math.hpp"

namespace cogdyn {

struct SectionParams {
  double L0 = 0.0;     // unactuated length
  double r = 0.0;      // actuator mounting radius
  double mass = 0.0;
  double l_max = 0.0;  // actuator extension limit
  double sigma = 0.0;  // rigid connector length along the tip Z axis
  double gamma = 0.0;  // rigid connector twist about the tip Z axis
  Mat3 Ke = Mat3::Zero();
  Mat3 D = Mat3::Zero();

  bool operator==(const SectionParams&) const = default;
};

enum class RangePolicy { error, clamp };

struct ArmModel {
  std::vector<SectionParams> sections;  // index 0 is the base section
  Vec3 gravity{0.0, 0.0, -9.81};
  RangePolicy range_policy = RangePolicy::error;
  // Modal polynomial order; 0 picks the lowest order >= 15 that certifies.
  int modal_order = 0;

  int size() const { return static_cast<int>(sections.size()); }
  int dof() const { return 3 * size(); }

  bool operator==(const ArmModel&) const = default;
};

struct JointState {
  VecX q;
  VecX qdot;
};

// One bound violation, reported with 1-based section and actuator numbers.
struct StateViolation {
  int section = 0;
  int actuator = 0;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

// Throws ValidationError naming the offending field and section.
void validate_model(const ArmModel& model);

ArmModel parse_arm_config(std::string_view json_text);
ArmModel load_arm_config(const std::filesystem::path& path);
std::string serialize_arm_config(const ArmModel& model);

// Throws ValidationError when q or qdot has the wrong length.
std::vector<StateViolation> validate_state(const ArmModel& model, const JointState& state);
std::vector<StateViolation> validate_configuration(const ArmModel& model, const VecX& q);

std::string describe(const StateViolation& v);

}  // namespace cogdyn
