#include "cogdyn/cog.hpp"

namespace cogdyn {

SectionDerivs cog_frame(const Arm& arm, int i, const Vec3& qi, Derivs order) {
  return arm.shape(i).evaluate(qi, Station::mean(), order);
}

std::vector<CogPose> cog_chain(const Arm& arm, const VecX& q) {
  const ChainKinematics chain = chain_kinematics(arm, q, Derivs::none);
  std::vector<CogPose> out(arm.size());
  for (int i = 0; i < arm.size(); ++i) {
    const SectionDerivs c = cog_frame(arm, i, Arm::joints(q, i), Derivs::none);
    const SectionPose base = i == 0 ? SectionPose{} : chain.tip[i - 1];
    out[i] = {base.R * c.R, base.p + base.R * c.p};
  }
  return out;
}

std::vector<BodyVelocity> cog_velocities(const Arm& arm, const VecX& q, const VecX& qdot) {
  const std::vector<BodyVelocity> tips = chain_velocities(arm, q, qdot);
  std::vector<BodyVelocity> out(arm.size());
  for (int i = 0; i < arm.size(); ++i) {
    const SectionDerivs c = cog_frame(arm, i, Arm::joints(q, i), Derivs::first);
    const Vec3 rate = Arm::joints(qdot, i);
    Mat3 Rdot = Mat3::Zero();
    for (int j = 0; j < 3; ++j) Rdot += c.R_q[j] * rate(j);
    const BodyVelocity prev = i == 0 ? BodyVelocity{} : tips[i - 1];
    out[i].Omega = c.R.transpose() * (prev.Omega * c.R + Rdot);
    out[i].upsilon = c.R.transpose() * (prev.upsilon + prev.Omega * c.p + c.p_q * rate);
  }
  return out;
}

std::vector<CogJacobians> cog_jacobians_hessians(const Arm& arm, const VecX& q) {
  const int dof = arm.dof();
  const ChainKinematics chain = chain_kinematics(arm, q, Derivs::second);
  std::vector<CogJacobians> out(arm.size());
  for (int i = 0; i < arm.size(); ++i) {
    const SectionDerivs c = cog_frame(arm, i, Arm::joints(q, i), Derivs::second);
    const Mat3 Rt = c.R.transpose();
    const int m = 3 * i;
    CogJacobians& g = out[i];
    g.Omega.assign(dof, Mat3::Zero());
    g.upsilon = Mat3X::Zero(3, dof);
    g.Omega_q.assign(dof, std::vector<Mat3>(dof, Mat3::Zero()));
    g.upsilon_q.assign(dof, Mat3X::Zero(3, dof));

    for (int h = 0; h < m; ++h) {
      const Vec3 v = chain.J[i - 1].col(h).head<3>();
      const Vec3 w = chain.J[i - 1].col(h).tail<3>();
      g.Omega[h] = Rt * skew(w) * c.R;
      g.upsilon.col(h) = Rt * (v + w.cross(c.p));
      for (int k = 0; k < m; ++k) {
        const Vec3 dv = chain.H[i - 1][k].col(h).head<3>();
        const Vec3 dw = chain.H[i - 1][k].col(h).tail<3>();
        g.Omega_q[k][h] = Rt * skew(dw) * c.R;
        g.upsilon_q[k].col(h) = Rt * (dv + dw.cross(c.p));
      }
      for (int j = 0; j < 3; ++j) {
        g.Omega_q[m + j][h] = c.R_q[j].transpose() * skew(w) * c.R + Rt * skew(w) * c.R_q[j];
        g.upsilon_q[m + j].col(h) = c.R_q[j].transpose() * (v + w.cross(c.p)) + Rt * w.cross(c.p_q.col(j));
      }
    }
    for (int j = 0; j < 3; ++j) {
      g.Omega[m + j] = Rt * c.R_q[j];
      g.upsilon.col(m + j) = Rt * c.p_q.col(j);
      for (int k = 0; k < 3; ++k) {
        g.Omega_q[m + k][m + j] = c.R_q[k].transpose() * c.R_q[j] + Rt * c.R_qq[j][k];
        g.upsilon_q[m + k].col(m + j) = c.R_q[k].transpose() * c.p_q.col(j) + Rt * c.p_qq[j][k];
      }
    }
  }
  return out;
}

}  // namespace cogdyn
