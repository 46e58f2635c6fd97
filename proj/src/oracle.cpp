#include "cogdyn/oracle.hpp"

#include <sstream>

#include "cogdyn/errors.hpp"

namespace cogdyn {
namespace {

using Mat96 = Eigen::Matrix<double, 9, 6>;
using Mat93 = Eigen::Matrix<double, 9, 3>;
using Mat9X = Eigen::Matrix<double, 9, Eigen::Dynamic>;
using Vec9 = Eigen::Matrix<double, 9, 1>;

// A disc's kinetic energy is ½ m |upsilon|² + ½ Ixx T2(OmegaᵀOmega), and
// T2(OmegaᵀOmega) is the squared norm of Omega's first two columns. So the
// disc state is the 9-vector (upsilon, Omega e1, Omega e2), linear in the
// predecessor tip twist (through T) and the local actuator rates (through L).
struct DiscMap {
  Mat96 T;
  Mat93 L;
};

DiscMap disc_map(const SectionDerivs& d) {
  DiscMap out;
  const Mat3 Rt = d.R.transpose();
  out.T.setZero();
  out.T.topLeftCorner<3, 3>() = Rt;
  out.T.topRightCorner<3, 3>() = -Rt * skew(d.p);
  for (int c = 0; c < 2; ++c) out.T.block<3, 3>(3 + 3 * c, 3) = -Rt * skew(d.R.col(c));
  for (int j = 0; j < 3; ++j) {
    out.L.col(j).head<3>() = Rt * d.p_q.col(j);
    for (int c = 0; c < 2; ++c) out.L.col(j).segment<3>(3 + 3 * c) = Rt * d.R_q[j].col(c);
  }
  return out;
}

DiscMap disc_map_partial(const SectionDerivs& d, int k) {
  DiscMap out;
  const Mat3 Rt = d.R.transpose();
  const Mat3 Rkt = d.R_q[k].transpose();
  out.T.setZero();
  out.T.topLeftCorner<3, 3>() = Rkt;
  out.T.topRightCorner<3, 3>() = -Rkt * skew(d.p) - Rt * skew(d.p_q.col(k));
  for (int c = 0; c < 2; ++c)
    out.T.block<3, 3>(3 + 3 * c, 3) = -Rkt * skew(d.R.col(c)) - Rt * skew(d.R_q[k].col(c));
  for (int j = 0; j < 3; ++j) {
    out.L.col(j).head<3>() = Rkt * d.p_q.col(j) + Rt * d.p_qq[j][k];
    for (int c = 0; c < 2; ++c)
      out.L.col(j).segment<3>(3 + 3 * c) = Rkt * d.R_q[j].col(c) + Rt * d.R_qq[j][k].col(c);
  }
  return out;
}

}  // namespace

IntegralDynamics::IntegralDynamics(const Arm& arm, int quad_order) : arm_(&arm), quad_order_(quad_order) {
  gauss_legendre(quad_order);  // validates the order up front
  const int dof = arm.dof();
  terms_.M = MatX::Zero(dof, dof);
  terms_.C = MatX::Zero(dof, dof);
  terms_.D = damping_matrix(arm);
  terms_.G = VecX::Zero(dof);
  qdd_ = VecX::Zero(dof);
  Mdot_ = MatX::Zero(dof, dof);
  N_ = MatX::Zero(dof, dof);
}

// One pass over sections and quadrature nodes. The Coriolis matrix uses the
// same contraction as the CoG model, ½(Mdot + N - Nᵀ) with N = d(M qd)/dq,
// only with the disc map integrated over xi instead of taken at the CoG.
template <bool WithRates>
void IntegralDynamics::accumulate(const VecX& q, const VecX& qdot) {
  constexpr Derivs order = WithRates ? Derivs::second : Derivs::first;
  chain_kinematics(*arm_, q, order, chain_);
  const QuadratureRule& rule = gauss_legendre(quad_order_);
  EomTerms& t = terms_;
  t.M.setZero();
  t.G.setZero();
  if constexpr (WithRates) t.C.setZero();

  SectionDerivs d;
  Mat9X Jd, Jdot, WJd;
  MatX Adot, B;
  for (int i = 0; i < arm_->size(); ++i) {
    const int m = 3 * i, s = m + 3;
    const SectionParams& sp = arm_->params(i);
    const Vec3 qi = Arm::joints(q, i);
    const auto A = chain_.J[i == 0 ? 0 : i - 1].leftCols(m);
    const Vec3 gb = i == 0 ? Vec3(-arm_->gravity()) : Vec3(-chain_.tip[i - 1].R.transpose() * arm_->gravity());

    Vec9 disc_weight;
    disc_weight << Vec3::Constant(sp.mass), Vec6::Constant(disc_inertia(sp.mass, sp.r));

    Jd.resize(9, s);
    WJd.resize(9, s);
    Vec3 rate = Vec3::Zero();
    Vec6 u = Vec6::Zero();
    Vec6 tip_force = Vec6::Zero();
    auto Mdot = Mdot_.topLeftCorner(s, s);
    auto N = N_.topLeftCorner(s, s);
    if constexpr (WithRates) {
      rate = Arm::joints(qdot, i);
      const auto v = qdot.head(m);
      u.noalias() = A * v;
      Adot.setZero(6, m);
      B.resize(6, m);
      for (int k = 0; k < m; ++k) {
        const auto Hk = chain_.H[i - 1][k].leftCols(m);
        Adot.noalias() += Hk * v(k);
        B.col(k).noalias() = Hk * v;
      }
      Jdot.resize(9, s);
      Mdot.setZero();
      N.setZero();
    }

    for (int n = 0; n < rule.size(); ++n) {
      const double w = rule.weights[n];
      arm_->shape(i).evaluate(qi, Station::at(rule.nodes[n]), order, d);
      const DiscMap map = disc_map(d);
      if (m > 0) Jd.leftCols(m).noalias() = map.T * A;
      Jd.rightCols<3>() = map.L;
      WJd.noalias() = (w * disc_weight).asDiagonal() * Jd;
      t.M.topLeftCorner(s, s).noalias() += Jd.transpose() * WJd;

      const Vec3 lever = d.p.cross(gb);
      if (m > 0) {
        t.G.head(m).noalias() += (w * sp.mass) * (A.topRows<3>().transpose() * gb);
        t.G.head(m).noalias() += (w * sp.mass) * (A.bottomRows<3>().transpose() * lever);
      }
      t.G.segment<3>(m).noalias() += (w * sp.mass) * (d.p_q.transpose() * gb);

      if constexpr (WithRates) {
        const Vec9 y = map.T * u + map.L * rate;
        const Vec9 f = (w * disc_weight).cwiseProduct(y);
        std::array<DiscMap, 3> dmap;
        Mat96 Tdot = Mat96::Zero();
        Mat93 Ldot = Mat93::Zero();
        for (int k = 0; k < 3; ++k) {
          dmap[k] = disc_map_partial(d, k);
          Tdot += dmap[k].T * rate(k);
          Ldot += dmap[k].L * rate(k);
        }
        if (m > 0) Jdot.leftCols(m).noalias() = Tdot * A + map.T * Adot;
        Jdot.rightCols<3>() = Ldot;
        const MatX half = Jdot.transpose() * WJd;
        Mdot += half + half.transpose();

        tip_force.noalias() += map.T.transpose() * f;
        if (m > 0) N.leftCols(m).noalias() += WJd.transpose() * (map.T * B);
        for (int k = 0; k < 3; ++k) {
          const Vec9 dy = dmap[k].T * u + dmap[k].L * rate;
          auto col = N.col(m + k);
          col.noalias() += WJd.transpose() * dy;
          if (m > 0) col.head(m).noalias() += A.transpose() * (dmap[k].T.transpose() * f);
          col.tail<3>().noalias() += dmap[k].L.transpose() * f;
        }
      }
    }

    if constexpr (WithRates) {
      for (int k = 0; k < m; ++k) N.col(k).head(m).noalias() += chain_.H[i - 1][k].leftCols(m).transpose() * tip_force;
      t.C.topLeftCorner(s, s) += 0.5 * (Mdot + N - N.transpose());
    }
    t.G.segment<3>(m) += sp.Ke * qi;
  }
}

const EomTerms& IntegralDynamics::assemble(const VecX& q, const VecX& qdot) {
  accumulate<true>(q, qdot);
  return terms_;
}

const MatX& IntegralDynamics::inertia(const VecX& q) {
  accumulate<false>(q, q);
  return terms_.M;
}

VecX IntegralDynamics::gravity_elastic(const VecX& q) {
  accumulate<false>(q, q);
  return terms_.G;
}

const VecX& IntegralDynamics::forward_dynamics(const VecX& q, const VecX& qdot, const VecX& tau) {
  const EomTerms& t = assemble(q, qdot);
  llt_.compute(t.M);
  if (llt_.info() != Eigen::Success) {
    std::ostringstream os;
    os << "integral inertia matrix is not positive definite at q = [" << q.transpose() << "]";
    throw NumericalError(os.str());
  }
  qdd_ = tau - (t.C + t.D) * qdot - t.G;
  llt_.solveInPlace(qdd_);
  return qdd_;
}

MatX oracle_inertia(const Arm& arm, const VecX& q, int quad_order) {
  IntegralDynamics dyn(arm, quad_order);
  return dyn.inertia(q);
}

EomTerms oracle_eom(const Arm& arm, const VecX& q, const VecX& qdot, int quad_order) {
  IntegralDynamics dyn(arm, quad_order);
  return dyn.assemble(q, qdot);
}

}  // namespace cogdyn
