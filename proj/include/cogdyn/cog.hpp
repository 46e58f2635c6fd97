#pragma once

#include <vector>

#include "cogdyn/chain.hpp"

namespace cogdyn {

// xi-averaged transform of section i and its partials. R is generally not a
// rotation.
SectionDerivs cog_frame(const Arm& arm, int i, const Vec3& qi, Derivs order);

struct CogPose {
  Mat3 R = Mat3::Identity();
  Vec3 p = Vec3::Zero();
};

// World CoG frames: R̄^i = R^{i-1} R̄_i and p̄^i = p^{i-1} + R^{i-1} p̄_i.
std::vector<CogPose> cog_chain(const Arm& arm, const VecX& q);

// CoG body velocities Omega̅_i = R̄ᵀ(Omega_{i-1} R̄ + dR̄/dt) and
// upsilon̅_i = R̄ᵀ(upsilon_{i-1} + Omega_{i-1} p̄ + dp̄/dt), with the
// predecessor taken at its tip. Omega̅ is not skew in general.
std::vector<BodyVelocity> cog_velocities(const Arm& arm, const VecX& q, const VecX& qdot);

// Linear maps from qdot to the CoG body velocities and their partials:
// Omega̅ = sum_h Omega[h] qdot_h, upsilon̅ = upsilon qdot, and
// Omega_q[k][h], upsilon_q[k] are the partials along q_k.
struct CogJacobians {
  std::vector<Mat3> Omega;
  Mat3X upsilon;
  std::vector<std::vector<Mat3>> Omega_q;
  std::vector<Mat3X> upsilon_q;
};

std::vector<CogJacobians> cog_jacobians_hessians(const Arm& arm, const VecX& q);

}  // namespace cogdyn
