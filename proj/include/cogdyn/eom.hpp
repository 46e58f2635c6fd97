#pragma once

#include <array>
#include <vector>

#include <Eigen/Cholesky>

#include "cogdyn/chain.hpp"
#include "cogdyn/energy.hpp"

namespace cogdyn {

// Terms of M qdd + (C + D) qd + G = tau.
struct EomTerms {
  MatX M;
  MatX C;
  MatX D;
  VecX G;
};

using Mat9 = Eigen::Matrix<double, 9, 9>;

// Quadratic form of one section's CoG kinetic energy in the stacked velocity
// y = (upsilon_{i-1}, omega_{i-1}, qdot_i): K̄_i = ½ yᵀ W y, with the
// predecessor twist taken at its tip in its own frame. `partials` receives
// dW/dl_j when non-null.
Mat9 section_weight(const SectionDerivs& cog, double mass, double r, const ShapingCoefficients& coeffs,
                    std::array<Mat9, 3>* partials = nullptr);

// Reusable evaluator for the CoG model. Holds scratch storage, so one
// instance must not be shared between threads.
//
// Each section's energy depends only on its predecessor's tip twist and its
// own actuator rates, so the arm is handled like a serial chain of
// generalized bodies: composite weights give M, their tangent along qdot
// gives Mdot, and differentiating the momentum recursion gives
// N = d(M qd)/dq. Every pass is O(n) per joint block, O(n^2) in total.
class CogDynamics {
 public:
  CogDynamics(const Arm& arm, ShapingCoefficients coeffs);

  const Arm& arm() const { return *arm_; }
  const ShapingCoefficients& coefficients() const { return coeffs_; }

  // M, C, G and D in a single pass over the sections.
  const EomTerms& assemble(const VecX& q, const VecX& qdot);
  const MatX& inertia(const VecX& q);
  MatX inertia_partial(const VecX& q, int h);
  VecX gravity_elastic(const VecX& q);

  // Solves M qdd = tau - (C + D) qd - G. Throws NumericalError if M is not
  // positive definite.
  const VecX& forward_dynamics(const VecX& q, const VecX& qdot, const VecX& tau);

 private:
  using Vec9 = Eigen::Matrix<double, 9, 1>;

  // Quantities of one section that depend on its own joints only. X and S
  // advance a twist across the section, u_i = X u_{i-1} + S qd_i.
  struct Section {
    SectionDerivs tip, cog;
    Mat3 base_R;  // world orientation of the predecessor tip
    Mat6 X;
    Mat63 S;
    Mat9 W;
    std::array<Mat6, 3> X_q;
    std::array<Mat63, 3> S_q;
    std::array<Mat9, 3> W_q;
    // Directional derivatives along the current tangent.
    Mat6 X_t;
    Mat63 S_t;
    Mat9 W_t;
  };

  void prepare(const VecX& q, Derivs order);
  void fill_inertia(MatX& M) const;
  void fill_inertia_rate(const VecX& tangent, MatX& Mt);
  void fill_momentum_jacobian(const VecX& qdot, MatX& N);
  void fill_gravity_elastic(const VecX& q, VecX& G) const;

  const Arm* arm_;
  ShapingCoefficients coeffs_;
  std::vector<Section> sec_;
  std::vector<Mat6> Ic_, Ic_t_;  // composite weight on each tip twist and its tangent
  std::vector<Vec6> u_, pi_;     // tip twists and the momenta conjugate to them
  std::vector<Vec9> f_;
  std::vector<Mat63> du_;
  EomTerms terms_;
  Eigen::LLT<MatX> llt_;
  VecX qdd_;
  MatX Mdot_, N_;
};

MatX damping_matrix(const Arm& arm);
MatX inertia_matrix(const Arm& arm, const VecX& q, const ShapingCoefficients& coeffs);
MatX inertia_partial(const Arm& arm, const VecX& q, const ShapingCoefficients& coeffs, int h);
MatX coriolis_matrix(const Arm& arm, const VecX& q, const VecX& qdot, const ShapingCoefficients& coeffs);
VecX gravity_elastic_vector(const Arm& arm, const VecX& q);
EomTerms assemble(const Arm& arm, const VecX& q, const VecX& qdot, const ShapingCoefficients& coeffs);
VecX forward_dynamics(const Arm& arm, const VecX& q, const VecX& qdot, const VecX& tau,
                      const ShapingCoefficients& coeffs);

}  // namespace cogdyn
