#pragma once

#include "cogdyn/eom.hpp"

namespace cogdyn {

// Integral (distributed-mass) dynamics: every section is a continuum of thin
// discs along xi, integrated by Gauss-Legendre quadrature. Serves as the
// reference model for the CoG equations and as the benchmark baseline.
// The kinetic energy reproduces kinetic_integral at the same quadrature order.
class IntegralDynamics {
 public:
  explicit IntegralDynamics(const Arm& arm, int quad_order = kDefaultQuadratureOrder);

  const Arm& arm() const { return *arm_; }
  int quad_order() const { return quad_order_; }

  const EomTerms& assemble(const VecX& q, const VecX& qdot);
  const MatX& inertia(const VecX& q);
  VecX gravity_elastic(const VecX& q);
  const VecX& forward_dynamics(const VecX& q, const VecX& qdot, const VecX& tau);

 private:
  template <bool WithRates>
  void accumulate(const VecX& q, const VecX& qdot);

  const Arm* arm_;
  int quad_order_;
  ChainKinematics chain_;
  EomTerms terms_;
  Eigen::LLT<MatX> llt_;
  VecX qdd_;
  MatX Mdot_, N_;
};

MatX oracle_inertia(const Arm& arm, const VecX& q, int quad_order = kDefaultQuadratureOrder);
EomTerms oracle_eom(const Arm& arm, const VecX& q, const VecX& qdot, int quad_order = kDefaultQuadratureOrder);

}  // namespace cogdyn
