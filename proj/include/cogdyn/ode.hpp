#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cogdyn/errors.hpp"
#include "cogdyn/math.hpp"

namespace cogdyn {

// dopri5: explicit Dormand-Prince 5(4) with FSAL.
// sdirk4: L-stable, stiffly accurate 5-stage SDIRK of order 4 (gamma = 1/4)
// with an embedded order-3 estimate; Newton on each stage with a
// finite-difference Jacobian.
enum class OdeMethod { dopri5, sdirk4 };
OdeMethod parse_ode_method(const std::string& name);
std::string to_string(OdeMethod m);

struct OdeOptions {
  OdeMethod method = OdeMethod::dopri5;
  double rtol = 1e-6;
  double atol = 1e-8;
  double initial_step = 0.0;  // 0 picks one from the local derivative scale
  double max_step = 0.0;      // 0 means the interval length
  double fixed_step = 0.0;    // > 0 disables error control (convergence studies)
  long max_steps = 20'000'000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evaluations = 0;
  long jacobians = 0;
  long factorizations = 0;
  long newton_failures = 0;
};

using OdeRhs = std::function<void(double t, const VecX& y, VecX& dydt)>;
// Called with interpolated states at each requested output time.
using OdeObserver = std::function<void(double t, const VecX& y)>;
// Called after every accepted step; may modify y in place and returns true
// when it did, which restarts the method from the modified state.
using OdeStepHook = std::function<bool(double t, VecX& y)>;

// Thrown when the step size falls below what double precision can resolve.
class StepSizeCollapse : public NumericalError {
 public:
  StepSizeCollapse(double t, double h, VecX y);
  double t() const { return t_; }
  double h() const { return h_; }
  const VecX& state() const { return y_; }

 private:
  double t_, h_;
  VecX y_;
};

struct OdeSegment {
  VecX y;              // state at t1
  double last_step = 0.0;  // accepted step size, a good start for a restart
};

// Integrates y' = f(t, y) from t0 to t1. Output times must be sorted; those
// within [t0, t1] are reported through `observe` by cubic Hermite
// interpolation of each accepted step.
OdeSegment integrate(const OdeRhs& f, double t0, double t1, VecX y0, const OdeOptions& opts, OdeStats& stats,
                     const std::vector<double>& output_times = {}, const OdeObserver& observe = {},
                     const OdeStepHook& after_step = {});

}  // namespace cogdyn
