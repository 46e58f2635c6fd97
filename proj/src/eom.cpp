#include "cogdyn/eom.hpp"

#include <sstream>

#include "cogdyn/errors.hpp"

namespace cogdyn {
namespace {

// Only the first two columns of R̄ span the disc plane.
constexpr int kDiscAxes = 2;

Mat3 partial_matrix(const SectionDerivs& c, int j) {
  Mat3 P;
  for (int k = 0; k < 3; ++k) P.col(k) = c.p_qq[k][j];
  return P;
}

void fill_symmetric(Mat9& W, int row, int col, const Mat3& block) {
  W.block<3, 3>(row, col) = block;
  if (row != col) W.block<3, 3>(col, row) = block.transpose();
}

}  // namespace

Mat9 section_weight(const SectionDerivs& c, double mass, double r, const ShapingCoefficients& coeffs,
                    std::array<Mat9, 3>* partials) {
  const double Ixx = disc_inertia(mass, r);
  const Vec3& bw = coeffs.beta_w;
  const Vec3& bv = coeffs.beta_v;
  const Mat3& P = c.p_q;
  const Mat3 px = skew(c.p);

  // Gamma, Lambda and Xi are the disc-plane quadratic forms behind
  // T2(R̄ᵀΩᵀΩR̄), T2(dR̄ᵀΩR̄) and T2(dR̄ᵀdR̄).
  Mat3 Gamma = Mat3::Zero(), Lambda = Mat3::Zero(), Xi = Mat3::Zero();
  for (int a = 0; a < kDiscAxes; ++a) {
    const Vec3 ra = c.R.col(a);
    Gamma += ra.squaredNorm() * Mat3::Identity() - ra * ra.transpose();
    for (int k = 0; k < 3; ++k) {
      Lambda.col(k) += ra.cross(c.R_q[k].col(a));
      for (int l = 0; l < 3; ++l) Xi(k, l) += c.R_q[k].col(a).dot(c.R_q[l].col(a));
    }
  }

  Mat9 W;
  fill_symmetric(W, 0, 0, mass * Mat3::Identity());
  fill_symmetric(W, 0, 3, -mass * px);
  fill_symmetric(W, 0, 6, mass * P);
  fill_symmetric(W, 3, 3, bw(0) * Ixx * Gamma + bv(0) * mass * px.transpose() * px);
  fill_symmetric(W, 3, 6, bw(1) * Ixx * Lambda + bv(1) * mass * px * P);
  fill_symmetric(W, 6, 6, bw(2) * Ixx * Xi + bv(2) * mass * P.transpose() * P);
  if (!partials) return W;

  for (int j = 0; j < 3; ++j) {
    const Mat3 Pj = partial_matrix(c, j);
    const Mat3 dpx = skew(P.col(j));
    Mat3 dGamma = Mat3::Zero(), dLambda = Mat3::Zero(), dXi = Mat3::Zero();
    for (int a = 0; a < kDiscAxes; ++a) {
      const Vec3 ra = c.R.col(a);
      const Vec3 da = c.R_q[j].col(a);
      dGamma += 2.0 * ra.dot(da) * Mat3::Identity() - da * ra.transpose() - ra * da.transpose();
      for (int k = 0; k < 3; ++k) {
        dLambda.col(k) += da.cross(c.R_q[k].col(a)) + ra.cross(c.R_qq[k][j].col(a));
        for (int l = 0; l < 3; ++l)
          dXi(k, l) += c.R_qq[k][j].col(a).dot(c.R_q[l].col(a)) + c.R_q[k].col(a).dot(c.R_qq[l][j].col(a));
      }
    }
    Mat9& Wj = (*partials)[j];
    Wj.setZero();
    fill_symmetric(Wj, 0, 3, -mass * dpx);
    fill_symmetric(Wj, 0, 6, mass * Pj);
    fill_symmetric(Wj, 3, 3, bw(0) * Ixx * dGamma + bv(0) * mass * (dpx.transpose() * px + px.transpose() * dpx));
    fill_symmetric(Wj, 3, 6, bw(1) * Ixx * dLambda + bv(1) * mass * (dpx * P + px * Pj));
    fill_symmetric(Wj, 6, 6, bw(2) * Ixx * dXi + bv(2) * mass * (Pj.transpose() * P + P.transpose() * Pj));
  }
  return W;
}

CogDynamics::CogDynamics(const Arm& arm, ShapingCoefficients coeffs) : arm_(&arm), coeffs_(std::move(coeffs)) {
  const int n = arm.size(), dof = arm.dof();
  sec_.resize(n);
  Ic_.resize(n);
  Ic_t_.resize(n);
  u_.resize(n);
  pi_.resize(n);
  f_.resize(n);
  du_.resize(n);
  terms_.M = MatX::Zero(dof, dof);
  terms_.C = MatX::Zero(dof, dof);
  terms_.D = damping_matrix(arm);
  terms_.G = VecX::Zero(dof);
  qdd_ = VecX::Zero(dof);
  Mdot_ = MatX::Zero(dof, dof);
  N_ = MatX::Zero(dof, dof);
}

// Ic_k is the kinetic energy of every section beyond tip k as a quadratic form
// in that tip's twist, with all later joints at rest.
void CogDynamics::prepare(const VecX& q, Derivs order) {
  const int n = arm_->size();
  const bool partials = order == Derivs::second;
  Mat3 R = Mat3::Identity();
  for (int i = 0; i < n; ++i) {
    Section& s = sec_[i];
    const SectionParams& p = arm_->params(i);
    const Vec3 qi = Arm::joints(q, i);
    s.base_R = R;
    s.tip = tip_transform(*arm_, i, qi, order);
    arm_->shape(i).evaluate(qi, Station::mean(), order, s.cog);
    s.X = twist_transform(s.tip.R, s.tip.p);
    s.S = local_twist_columns(s.tip);
    s.W = section_weight(s.cog, p.mass, p.r, coeffs_, partials ? &s.W_q : nullptr);
    if (partials)
      for (int k = 0; k < 3; ++k) {
        s.X_q[k] = twist_transform_partial(s.tip, k);
        s.S_q[k] = local_twist_columns_partial(s.tip, k);
      }
    R = R * s.tip.R;
  }
  Ic_[n - 1].setZero();
  for (int k = n - 2; k >= 0; --k) {
    const Section& c = sec_[k + 1];
    Ic_[k].noalias() = c.X.transpose() * Ic_[k + 1] * c.X;
    Ic_[k] += c.W.topLeftCorner<6, 6>();
  }
}

// Column block l: a unit rate on joint l loads tip l-1 with F, which reaches
// earlier tips through X^T, and M_jl = S_j^T F at tip j.
void CogDynamics::fill_inertia(MatX& M) const {
  for (int l = 0; l < arm_->size(); ++l) {
    const Section& s = sec_[l];
    const Mat63 IS = Ic_[l] * s.S;
    const Mat3 diag = s.S.transpose() * IS + s.W.bottomRightCorner<3, 3>();
    M.block<3, 3>(3 * l, 3 * l) = 0.5 * (diag + diag.transpose());
    Mat63 F = s.W.topRightCorner<6, 3>();
    F.noalias() += s.X.transpose() * IS;
    for (int j = l - 1; j >= 0; --j) {
      const Section& t = sec_[j];
      M.block<3, 3>(3 * j, 3 * l).noalias() = t.S.transpose() * F;
      M.block<3, 3>(3 * l, 3 * j) = M.block<3, 3>(3 * j, 3 * l).transpose();
      if (j > 0) F = t.X.transpose() * F;
    }
  }
}

// Tangent of fill_inertia along `tangent`, so tangent = qd gives Mdot and a
// unit vector gives a partial of M.
void CogDynamics::fill_inertia_rate(const VecX& tangent, MatX& Mt) {
  const int n = arm_->size();
  for (int i = 0; i < n; ++i) {
    Section& s = sec_[i];
    s.X_t.setZero();
    s.S_t.setZero();
    s.W_t.setZero();
    for (int k = 0; k < 3; ++k) {
      const double a = tangent(3 * i + k);
      if (a == 0.0) continue;
      s.X_t += a * s.X_q[k];
      s.S_t += a * s.S_q[k];
      s.W_t += a * s.W_q[k];
    }
  }
  Ic_t_[n - 1].setZero();
  for (int k = n - 2; k >= 0; --k) {
    const Section& c = sec_[k + 1];
    const Mat6 IX = Ic_[k + 1] * c.X;
    const Mat6 cross = c.X_t.transpose() * IX;
    Ic_t_[k].noalias() = c.X.transpose() * Ic_t_[k + 1] * c.X;
    Ic_t_[k] += cross + cross.transpose() + c.W_t.topLeftCorner<6, 6>();
  }
  for (int l = 0; l < n; ++l) {
    const Section& s = sec_[l];
    const Mat63 IS = Ic_[l] * s.S;
    const Mat63 IS_t = Ic_t_[l] * s.S + Ic_[l] * s.S_t;
    Mat3 diag = s.S_t.transpose() * IS;
    diag += s.S.transpose() * IS_t;
    diag += s.W_t.bottomRightCorner<3, 3>();
    Mt.block<3, 3>(3 * l, 3 * l) = 0.5 * (diag + diag.transpose());

    Mat63 F = s.W.topRightCorner<6, 3>() + s.X.transpose() * IS;
    Mat63 F_t = s.W_t.topRightCorner<6, 3>() + s.X_t.transpose() * IS + s.X.transpose() * IS_t;
    for (int j = l - 1; j >= 0; --j) {
      const Section& t = sec_[j];
      Mt.block<3, 3>(3 * j, 3 * l).noalias() = t.S_t.transpose() * F;
      Mt.block<3, 3>(3 * j, 3 * l).noalias() += t.S.transpose() * F_t;
      Mt.block<3, 3>(3 * l, 3 * j) = Mt.block<3, 3>(3 * j, 3 * l).transpose();
      if (j > 0) {
        F_t = t.X_t.transpose() * F + t.X.transpose() * F_t;
        F = t.X.transpose() * F;
      }
    }
  }
}

// The momentum is p_i = f_i,q + S_i^T pi_i, where f_i = W_i y_i and pi_k is
// the momentum conjugate to tip twist k. Joint block b perturbs X_b, S_b and
// W_b only, so each block of columns is one forward sweep over the twists
// beyond b and one backward sweep over the momenta.
void CogDynamics::fill_momentum_jacobian(const VecX& qdot, MatX& N) {
  const int n = arm_->size();
  const auto rate = [&](int i) { return Arm::joints(qdot, i); };
  const auto y_of = [&](int i) {
    Vec9 y;
    y.head<6>() = i > 0 ? u_[i - 1] : Vec6::Zero();
    y.tail<3>() = rate(i);
    return y;
  };
  for (int i = 0; i < n; ++i) {
    u_[i] = sec_[i].S * rate(i);
    if (i > 0) u_[i].noalias() += sec_[i].X * u_[i - 1];
    f_[i].noalias() = sec_[i].W * y_of(i);
  }
  pi_[n - 1].setZero();
  for (int k = n - 2; k >= 0; --k) {
    pi_[k].noalias() = sec_[k + 1].X.transpose() * pi_[k + 1];
    pi_[k] += f_[k + 1].head<6>();
  }

  for (int b = 0; b < n; ++b) {
    const Section& sb = sec_[b];
    const Vec6 u_prev = b > 0 ? u_[b - 1] : Vec6::Zero();
    const Vec9 yb = y_of(b);
    Eigen::Matrix<double, 9, 3> df;
    Mat3 dSt_pi;
    for (int c = 0; c < 3; ++c) {
      du_[b].col(c) = sb.X_q[c] * u_prev + sb.S_q[c] * rate(b);
      df.col(c) = sb.W_q[c] * yb;
      dSt_pi.col(c) = sb.S_q[c].transpose() * pi_[b];
    }
    for (int i = b + 1; i < n; ++i) du_[i].noalias() = sec_[i].X * du_[i - 1];

    Mat63 dpi = Mat63::Zero();  // tangent of pi_k, swept from the tip down
    for (int k = n - 1; k >= 0; --k) {
      const Section& s = sec_[k];
      auto block = N.block<3, 3>(3 * k, 3 * b);
      block.noalias() = s.S.transpose() * dpi;
      if (k > b) block.noalias() += s.W.bottomLeftCorner<3, 6>() * du_[k - 1];
      if (k == b) block += df.bottomRows<3>() + dSt_pi;
      if (k == 0) break;
      Mat63 next = s.X.transpose() * dpi;
      if (k > b) next.noalias() += s.W.topLeftCorner<6, 6>() * du_[k - 1];
      if (k == b) {
        next += df.topRows<6>();
        for (int c = 0; c < 3; ++c) next.col(c) += s.X_q[c].transpose() * pi_[k];
      }
      dpi = next;
    }
  }
}

// The gravity potential is -m g^T p̄^i with g the gravitational acceleration.
// Section i loads its predecessor tip with the wrench (m g_b, m p̄_i x g_b),
// g_b being -g in that tip's frame, and the wrenches travel down through X^T.
void CogDynamics::fill_gravity_elastic(const VecX& q, VecX& G) const {
  Vec6 wrench = Vec6::Zero();
  for (int i = arm_->size() - 1; i >= 0; --i) {
    const Section& s = sec_[i];
    const SectionParams& p = arm_->params(i);
    const Vec3 gb = -(s.base_R.transpose() * arm_->gravity());
    auto Gi = G.segment<3>(3 * i);
    Gi.noalias() = s.S.transpose() * wrench;
    Gi.noalias() += p.mass * (s.cog.p_q.transpose() * gb);
    Gi.noalias() += p.Ke * Arm::joints(q, i);
    wrench = s.X.transpose() * wrench;
    wrench.head<3>() += p.mass * gb;
    wrench.tail<3>() += p.mass * s.cog.p.cross(gb);
  }
}

VecX CogDynamics::gravity_elastic(const VecX& q) {
  prepare(q, Derivs::first);
  fill_gravity_elastic(q, terms_.G);
  return terms_.G;
}

const MatX& CogDynamics::inertia(const VecX& q) {
  prepare(q, Derivs::first);
  fill_inertia(terms_.M);
  return terms_.M;
}

MatX CogDynamics::inertia_partial(const VecX& q, int h) {
  const int dof = arm_->dof();
  if (h < 0 || h >= dof) throw ValidationError("joint index out of range");
  prepare(q, Derivs::second);
  MatX dM = MatX::Zero(dof, dof);
  fill_inertia_rate(VecX::Unit(dof, h), dM);
  return dM;
}

// C follows the Christoffel construction
//   C_jk = ½ sum_h (dM_jk/dq_h + dM_jh/dq_k - dM_kh/dq_j) qd_h = ½ (Mdot + N - Nᵀ),
// with N = d(M qd)/dq.
const EomTerms& CogDynamics::assemble(const VecX& q, const VecX& qdot) {
  prepare(q, Derivs::second);
  EomTerms& t = terms_;
  fill_inertia(t.M);
  fill_inertia_rate(qdot, Mdot_);
  fill_momentum_jacobian(qdot, N_);
  t.C = 0.5 * (Mdot_ + N_ - N_.transpose());
  fill_gravity_elastic(q, t.G);
  return t;
}

const VecX& CogDynamics::forward_dynamics(const VecX& q, const VecX& qdot, const VecX& tau) {
  const EomTerms& t = assemble(q, qdot);
  llt_.compute(t.M);
  if (llt_.info() != Eigen::Success) {
    std::ostringstream os;
    os << "inertia matrix is not positive definite at q = [" << q.transpose() << "]";
    throw NumericalError(os.str());
  }
  qdd_ = tau - (t.C + t.D) * qdot - t.G;
  llt_.solveInPlace(qdd_);
  return qdd_;
}

MatX damping_matrix(const Arm& arm) {
  MatX D = MatX::Zero(arm.dof(), arm.dof());
  for (int i = 0; i < arm.size(); ++i) D.block<3, 3>(3 * i, 3 * i) = arm.params(i).D;
  return D;
}

MatX inertia_matrix(const Arm& arm, const VecX& q, const ShapingCoefficients& coeffs) {
  CogDynamics dyn(arm, coeffs);
  return dyn.inertia(q);
}

MatX inertia_partial(const Arm& arm, const VecX& q, const ShapingCoefficients& coeffs, int h) {
  CogDynamics dyn(arm, coeffs);
  return dyn.inertia_partial(q, h);
}

MatX coriolis_matrix(const Arm& arm, const VecX& q, const VecX& qdot, const ShapingCoefficients& coeffs) {
  CogDynamics dyn(arm, coeffs);
  return dyn.assemble(q, qdot).C;
}

VecX gravity_elastic_vector(const Arm& arm, const VecX& q) {
  CogDynamics dyn(arm, ShapingCoefficients::unscaled());
  return dyn.gravity_elastic(q);
}

EomTerms assemble(const Arm& arm, const VecX& q, const VecX& qdot, const ShapingCoefficients& coeffs) {
  CogDynamics dyn(arm, coeffs);
  return dyn.assemble(q, qdot);
}

VecX forward_dynamics(const Arm& arm, const VecX& q, const VecX& qdot, const VecX& tau,
                      const ShapingCoefficients& coeffs) {
  CogDynamics dyn(arm, coeffs);
  return dyn.forward_dynamics(q, qdot, tau);
}

}  // namespace cogdyn
