#pragma once

// Simulation set-ups shared by the simulator tests and the acceptance run.

#include "cogdyn/simulator.hpp"
#include "oracles.hpp"

namespace fixture {

using cogdyn::Mat3;
using cogdyn::Vec3;
using cogdyn::VecX;

// Hanging three-section arm with soft springs so that an undamped swing stays
// inside the actuator range.
inline cogdyn::ArmModel soft_hanging_arm(double Ke = 100.0, double D = 0.0) {
  cogdyn::ArmModel m;
  for (int i = 0; i < 3; ++i) {
    cogdyn::SectionParams s = oracle::prototype_section();
    s.Ke = Ke * Mat3::Identity();
    s.D = D * Mat3::Identity();
    m.sections.push_back(s);
  }
  m.gravity = Vec3(0.0, 0.0, 9.81);
  return m;
}

// Equilibrium with every section bent a little off its rest shape.
inline cogdyn::JointState perturbed_rest(const cogdyn::Arm& arm, double fraction = 0.2) {
  cogdyn::JointState s{cogdyn::static_equilibrium(arm, VecX::Zero(arm.dof())), VecX::Zero(arm.dof())};
  for (int i = 0; i < arm.size(); ++i) {
    const double share = s.q(3 * i + 2);
    s.q(3 * i) += fraction * share;
    s.q(3 * i + 1) -= fraction * share;
  }
  return s;
}

inline cogdyn::SimulationOptions tight(double rtol = 1e-9) {
  cogdyn::SimulationOptions o;
  o.ode.rtol = rtol;
  o.ode.atol = rtol * 1e-3;
  return o;
}

}  // namespace fixture
