#pragma once

#include <array>
#include <vector>

#include "cogdyn/arm.hpp"

namespace cogdyn {

using Mat63 = Eigen::Matrix<double, 6, 3>;

// Section i's transform at xi = 1 with the rigid connector P_Z(sigma) R_Z(gamma)
// appended. The connector is constant, so the partials carry through it.
SectionDerivs tip_transform(const Arm& arm, int i, const Vec3& qi, Derivs order);

// Body velocity of a frame in the Ω = RᵀṘ matrix convention.
struct BodyVelocity {
  Mat3 Omega = Mat3::Zero();  // R^T dR/dt
  Vec3 upsilon = Vec3::Zero();  // R^T dp/dt
};

// Whole-arm kinematics at the section tips. Jacobians hold body twists with
// rows (upsilon; omega), one column per joint, zero-padded to 3n columns;
// the angular block of joint h is skew(J.col(h).tail<3>()). H[i][k] is the
// partial of J[i] along q_k for k < 3(i+1); later joints cannot move tip i.
struct ChainKinematics {
  std::vector<SectionPose> tip;
  std::vector<Mat6X> J;
  std::vector<std::vector<Mat6X>> H;
};

// Fills `out`, reusing its storage. Derivs::none gives poses only.
void chain_kinematics(const Arm& arm, const VecX& q, Derivs order, ChainKinematics& out);
ChainKinematics chain_kinematics(const Arm& arm, const VecX& q, Derivs order = Derivs::second);

// World pose of the point xi along section i (0-based). Predecessors enter at
// their tips; section i's own connector is included only at xi = 1.
SectionPose chain_pose(const Arm& arm, const VecX& q, int i, double xi);

// Tip body velocities by the recursion
//   Omega_i = R^T (Omega_{i-1} R + dR/dt),  upsilon_i = R^T (upsilon_{i-1} + Omega_{i-1} p + dp/dt),
// evaluated as omega_i = R^T omega_{i-1} + (R^T dR/dt)^vee so that Omega_i is
// exactly skew even where the polynomial R is orthogonal only approximately.
std::vector<BodyVelocity> chain_velocities(const Arm& arm, const VecX& q, const VecX& qdot);

// Twist helpers shared with the integral oracle. For a child frame at (R, p)
// relative to its parent, X maps a parent body twist to the child frame and
// the local columns are the twist produced by each actuator rate.
Mat6 twist_transform(const Mat3& R, const Vec3& p);
Mat6 twist_transform_partial(const SectionDerivs& d, int j);
Mat63 local_twist_columns(const SectionDerivs& d);
Mat63 local_twist_columns_partial(const SectionDerivs& d, int j);

}  // namespace cogdyn
