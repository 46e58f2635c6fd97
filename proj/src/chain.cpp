#include "cogdyn/chain.hpp"

#include <string>

#include "cogdyn/errors.hpp"

namespace cogdyn {

SectionDerivs tip_transform(const Arm& arm, int i, const Vec3& qi, Derivs order) {
  SectionDerivs d = arm.shape(i).evaluate(qi, Station::at(1.0), order);
  const SectionParams& s = arm.params(i);
  if (s.sigma == 0.0 && s.gamma == 0.0) return d;

  const Mat3 Rz = rot_z(s.gamma);
  d.p += s.sigma * d.R.col(2);
  d.R = d.R * Rz;
  if (order >= Derivs::first)
    for (int j = 0; j < 3; ++j) {
      d.p_q.col(j) += s.sigma * d.R_q[j].col(2);
      d.R_q[j] = d.R_q[j] * Rz;
    }
  if (order >= Derivs::second)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        d.p_qq[j][k] += s.sigma * d.R_qq[j][k].col(2);
        d.R_qq[j][k] = d.R_qq[j][k] * Rz;
      }
  return d;
}

Mat6 twist_transform(const Mat3& R, const Vec3& p) {
  Mat6 X = Mat6::Zero();
  X.topLeftCorner<3, 3>() = R.transpose();
  X.topRightCorner<3, 3>() = -R.transpose() * skew(p);
  X.bottomRightCorner<3, 3>() = R.transpose();
  return X;
}

Mat6 twist_transform_partial(const SectionDerivs& d, int j) {
  Mat6 X = Mat6::Zero();
  X.topLeftCorner<3, 3>() = d.R_q[j].transpose();
  X.topRightCorner<3, 3>() = -d.R_q[j].transpose() * skew(d.p) - d.R.transpose() * skew(d.p_q.col(j));
  X.bottomRightCorner<3, 3>() = d.R_q[j].transpose();
  return X;
}

Mat63 local_twist_columns(const SectionDerivs& d) {
  Mat63 S;
  for (int j = 0; j < 3; ++j) {
    S.col(j).head<3>() = d.R.transpose() * d.p_q.col(j);
    S.col(j).tail<3>() = vee(d.R.transpose() * d.R_q[j]);
  }
  return S;
}

Mat63 local_twist_columns_partial(const SectionDerivs& d, int k) {
  Mat63 S;
  for (int j = 0; j < 3; ++j) {
    S.col(j).head<3>() = d.R_q[k].transpose() * d.p_q.col(j) + d.R.transpose() * d.p_qq[j][k];
    S.col(j).tail<3>() = vee(d.R_q[k].transpose() * d.R_q[j] + d.R.transpose() * d.R_qq[j][k]);
  }
  return S;
}

namespace {

void reshape(ChainKinematics& out, int n, Derivs order) {
  const int dof = 3 * n;
  out.tip.resize(n);
  if (order >= Derivs::first && (static_cast<int>(out.J.size()) != n || out.J.front().cols() != dof))
    out.J.assign(n, Mat6X::Zero(6, dof));
  if (order >= Derivs::second) {
    bool fits = static_cast<int>(out.H.size()) == n;
    for (int i = 0; fits && i < n; ++i)
      fits = static_cast<int>(out.H[i].size()) == 3 * (i + 1) && out.H[i].front().cols() == dof;
    if (!fits) {
      out.H.resize(n);
      for (int i = 0; i < n; ++i) out.H[i].assign(3 * (i + 1), Mat6X::Zero(6, dof));
    }
  }
}

}  // namespace

void chain_kinematics(const Arm& arm, const VecX& q, Derivs order, ChainKinematics& out) {
  const int n = arm.size();
  reshape(out, n, order);
  Mat3 R = Mat3::Identity();
  Vec3 p = Vec3::Zero();
  for (int i = 0; i < n; ++i) {
    const SectionDerivs d = tip_transform(arm, i, Arm::joints(q, i), order);
    p += R * d.p;
    R = R * d.R;
    out.tip[i] = {R, p};
    if (order == Derivs::none) continue;

    // Joints before section i occupy the first m columns; section i adds three.
    const int m = 3 * i;
    const Mat6 X = twist_transform(d.R, d.p);
    Mat6X& J = out.J[i];
    if (i > 0) J.leftCols(m).noalias() = X * out.J[i - 1].leftCols(m);
    J.middleCols<3>(m) = local_twist_columns(d);
    if (order == Derivs::first) continue;

    std::vector<Mat6X>& H = out.H[i];
    for (int k = 0; k < m; ++k) H[k].leftCols(m).noalias() = X * out.H[i - 1][k].leftCols(m);
    for (int j = 0; j < 3; ++j) {
      if (i > 0) H[m + j].leftCols(m).noalias() = twist_transform_partial(d, j) * out.J[i - 1].leftCols(m);
      H[m + j].middleCols<3>(m) = local_twist_columns_partial(d, j);
    }
  }
}

ChainKinematics chain_kinematics(const Arm& arm, const VecX& q, Derivs order) {
  ChainKinematics out;
  chain_kinematics(arm, q, order, out);
  return out;
}

SectionPose chain_pose(const Arm& arm, const VecX& q, int i, double xi) {
  if (i < 0 || i >= arm.size())
    throw ValidationError("section index " + std::to_string(i) + " outside [0, " + std::to_string(arm.size()) + ")");
  if (!(xi >= 0.0 && xi <= 1.0)) throw ValidationError("xi must lie in [0, 1]");
  SectionPose base;
  for (int k = 0; k < i; ++k) {
    const SectionDerivs d = tip_transform(arm, k, Arm::joints(q, k), Derivs::none);
    base.p += base.R * d.p;
    base.R = base.R * d.R;
  }
  const SectionPose local =
      xi == 1.0 ? tip_transform(arm, i, Arm::joints(q, i), Derivs::none).pose() : arm.shape(i).pose(Arm::joints(q, i), xi);
  return {base.R * local.R, base.p + base.R * local.p};
}

std::vector<BodyVelocity> chain_velocities(const Arm& arm, const VecX& q, const VecX& qdot) {
  std::vector<BodyVelocity> out(arm.size());
  BodyVelocity prev;
  for (int i = 0; i < arm.size(); ++i) {
    const SectionDerivs d = tip_transform(arm, i, Arm::joints(q, i), Derivs::first);
    const Vec3 rate = Arm::joints(qdot, i);
    Mat3 Rdot = Mat3::Zero();
    for (int j = 0; j < 3; ++j) Rdot += d.R_q[j] * rate(j);
    const Vec3 pdot = d.p_q * rate;
    // Written in twist form, R^T [w]x R = [R^T w]x, which is what the
    // Jacobian columns encode. The polynomial R is orthogonal only to its
    // certified accuracy, and this keeps Omega exactly skew and equal to J qdot.
    const Vec3 omega = d.R.transpose() * vee(prev.Omega) + vee(d.R.transpose() * Rdot);
    out[i].Omega = skew(omega);
    out[i].upsilon = d.R.transpose() * (prev.upsilon + prev.Omega * d.p + pdot);
    prev = out[i];
  }
  return out;
}

}  // namespace cogdyn
