#include "cogdyn/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/LU>

namespace cogdyn {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kSafety = 0.9;
constexpr double kMinShrink = 0.2;
constexpr double kMaxGrow = 5.0;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

// SDIRK order 4, gamma = 1/4; the last row equals the weights.
constexpr int kStages = 5;
constexpr double kGamma = 0.25;
constexpr std::array<double, kStages> kC{0.25, 0.75, 11.0 / 20, 0.5, 1.0};
constexpr std::array<std::array<double, kStages>, kStages> kA{{
    {0.25, 0, 0, 0, 0},
    {0.5, 0.25, 0, 0, 0},
    {17.0 / 50, -1.0 / 25, 0.25, 0, 0},
    {371.0 / 1360, -137.0 / 2720, 15.0 / 544, 0.25, 0},
    {25.0 / 24, -49.0 / 48, 125.0 / 16, -85.0 / 12, 0.25},
}};
constexpr std::array<double, kStages> kBhat{59.0 / 48, -17.0 / 96, 225.0 / 32, -85.0 / 12, 0.0};

double scaled_norm(const VecX& e, const VecX& y0, const VecX& y1, const OdeOptions& o) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const double sc = o.atol + o.rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    sum += (e(i) / sc) * (e(i) / sc);
  }
  return e.size() > 0 ? std::sqrt(sum / static_cast<double>(e.size())) : 0.0;
}

VecX hermite(double theta, double h, const VecX& y0, const VecX& f0, const VecX& y1, const VecX& f1) {
  const double s = 1.0 - theta;
  return (1.0 + 2.0 * theta) * s * s * y0 + theta * s * s * h * f0 + theta * theta * (3.0 - 2.0 * theta) * y1 +
         theta * theta * (theta - 1.0) * h * f1;
}

class Stepper {
 public:
  Stepper(const OdeRhs& f, const OdeOptions& o, OdeStats& stats) : f_(f), o_(o), stats_(stats) {}

  void eval(double t, const VecX& y, VecX& out) {
    out.resize(y.size());
    f_(t, y, out);
    ++stats_.rhs_evaluations;
  }

  // Error-estimate order plus one, for the step-size exponent.
  double order() const { return o_.method == OdeMethod::dopri5 ? 5.0 : 4.0; }

  // A projected state is close to the old one, so the Jacobian stays usable
  // but is refreshed at the first sign of trouble.
  void mark_jacobian_stale() { jacobian_fresh_ = false; }

  // One attempt from (t, y) with derivative f0. Fills y1 and f1 and returns
  // the scaled error, or +inf when the stage equations failed to converge.
  double attempt(double t, const VecX& y, const VecX& f0, double h, VecX& y1, VecX& f1) {
    return o_.method == OdeMethod::dopri5 ? dopri(t, y, f0, h, y1, f1) : sdirk(t, y, f0, h, y1, f1);
  }

 private:
  double dopri(double t, const VecX& y, const VecX& k1, double h, VecX& y1, VecX& k7) {
    eval(t + c2 * h, y + h * a21 * k1, k2_);
    eval(t + c3 * h, y + h * (a31 * k1 + a32 * k2_), k3_);
    eval(t + c4 * h, y + h * (a41 * k1 + a42 * k2_ + a43 * k3_), k4_);
    eval(t + c5 * h, y + h * (a51 * k1 + a52 * k2_ + a53 * k3_ + a54 * k4_), k5_);
    eval(t + h, y + h * (a61 * k1 + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_), k6_);
    y1 = y + h * (b1 * k1 + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
    eval(t + h, y1, k7);
    const VecX err = h * (e1 * k1 + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7);
    return scaled_norm(err, y, y1, o_);
  }

  void refresh_jacobian(double t, const VecX& y, const VecX& f0) {
    const Eigen::Index n = y.size();
    J_.resize(n, n);
    VecX yp = y, fp;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double dy = std::sqrt(kEps) * std::max(std::abs(y(j)), std::max(o_.atol / std::max(o_.rtol, kEps), 1e-5));
      yp(j) = y(j) + dy;
      eval(t, yp, fp);
      J_.col(j) = (fp - f0) / dy;
      yp(j) = y(j);
    }
    ++stats_.jacobians;
    have_jacobian_ = jacobian_fresh_ = true;
  }

  double sdirk(double t, const VecX& y, const VecX& f0, double h, VecX& y1, VecX& f1) {
    const Eigen::Index n = y.size();
    if (!have_jacobian_) refresh_jacobian(t, y, f0);
    for (int tries = 0;; ++tries) {
      lu_.compute(MatX::Identity(n, n) - (h * kGamma) * J_);
      ++stats_.factorizations;
      if (solve_stages(t, y, f0, h)) break;
      ++stats_.newton_failures;
      if (jacobian_fresh_ || tries > 0) return std::numeric_limits<double>::infinity();
      refresh_jacobian(t, y, f0);
    }
    jacobian_fresh_ = false;
    y1 = Y_[kStages - 1];
    f1 = k_[kStages - 1];
    VecX err = VecX::Zero(n);
    for (int s = 0; s < kStages; ++s) err += (h * (kA[kStages - 1][s] - kBhat[s])) * k_[s];
    // Filtering through the iteration matrix damps the stiff components of
    // the estimate, which would otherwise force needlessly small steps.
    err = lu_.solve(err);
    return scaled_norm(err, y, y1, o_);
  }

  bool solve_stages(double t, const VecX& y, const VecX& f0, double h) {
    const double hg = h * kGamma;
    const bool fixed = o_.fixed_step > 0.0;
    VecX base, F, fy, delta;
    for (int s = 0; s < kStages; ++s) {
      base = y;
      for (int j = 0; j < s; ++j) base += (h * kA[s][j]) * k_[j];
      VecX& Y = Y_[s];
      Y = base + hg * (s == 0 ? f0 : k_[s - 1]);
      double previous = 0.0;
      bool converged = false;
      for (int it = 0; it < (fixed ? 30 : 10); ++it) {
        eval(t + kC[s] * h, Y, fy);
        F = Y - base - hg * fy;
        delta = lu_.solve(F);
        Y -= delta;
        // Without error control there is no tolerance to hide behind, so
        // fixed steps iterate to round-off.
        const double size = fixed ? delta.norm() / (1.0 + Y.norm()) : scaled_norm(delta, y, Y, o_);
        const double target = fixed ? 1e-14 : 0.03;
        if (!std::isfinite(size)) return false;
        if (size <= target * 1e-2) {
          converged = true;
          break;
        }
        if (it > 0) {
          const double rate = size / previous;
          if (rate >= 1.0) return false;
          if (rate / (1.0 - rate) * size < target) {
            converged = true;
            break;
          }
        } else if (!fixed && size < 1e-3) {
          converged = true;
          break;
        }
        previous = size;
      }
      if (!converged) return false;
      k_[s] = (Y - base) / hg;
    }
    return true;
  }

  const OdeRhs& f_;
  const OdeOptions& o_;
  OdeStats& stats_;
  VecX k2_, k3_, k4_, k5_, k6_;
  std::array<VecX, kStages> Y_, k_;
  MatX J_;
  Eigen::PartialPivLU<MatX> lu_;
  bool have_jacobian_ = false;
  bool jacobian_fresh_ = false;
};

std::string describe_collapse(double t, double h, const VecX& y) {
  std::ostringstream os;
  os.precision(17);
  os << "step size collapsed to " << h << " at t = " << t << "; state = [";
  for (Eigen::Index i = 0; i < y.size(); ++i) os << (i ? ", " : "") << y(i);
  os << "]";
  return os.str();
}

}  // namespace

OdeMethod parse_ode_method(const std::string& name) {
  if (name == "dopri5") return OdeMethod::dopri5;
  if (name == "sdirk4") return OdeMethod::sdirk4;
  throw ValidationError("solver method must be 'dopri5' or 'sdirk4', got '" + name + "'");
}

std::string to_string(OdeMethod m) { return m == OdeMethod::dopri5 ? "dopri5" : "sdirk4"; }

StepSizeCollapse::StepSizeCollapse(double t, double h, VecX y)
    : NumericalError(describe_collapse(t, h, y)), t_(t), h_(h), y_(std::move(y)) {}

OdeSegment integrate(const OdeRhs& f, double t0, double t1, VecX y0, const OdeOptions& opts, OdeStats& stats,
                     const std::vector<double>& output_times, const OdeObserver& observe,
                     const OdeStepHook& after_step) {
  if (!(t1 >= t0)) throw ValidationError("integration interval must satisfy t1 >= t0");
  if (opts.fixed_step <= 0.0 && !(opts.rtol > 0.0 && opts.atol > 0.0))
    throw ValidationError("solver tolerances must be positive");

  Stepper stepper(f, opts, stats);
  double t = t0;
  VecX y = std::move(y0), fy, y_new, f_new;
  stepper.eval(t, y, fy);

  auto next_out = std::lower_bound(output_times.begin(), output_times.end(), t0);
  if (observe)
    for (; next_out != output_times.end() && *next_out <= t0; ++next_out) observe(*next_out, y);
  if (t1 == t0) return {y, 0.0};

  const double span = t1 - t0;
  const double max_step = opts.max_step > 0.0 ? std::min(opts.max_step, span) : span;
  double h;
  if (opts.fixed_step > 0.0) {
    h = opts.fixed_step;
  } else if (opts.initial_step > 0.0) {
    h = opts.initial_step;
  } else {
    const VecX zero = VecX::Zero(y.size());
    const double d0 = scaled_norm(y, zero, zero, opts), d1 = scaled_norm(fy, zero, zero, opts);
    const double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    VecX f1;
    stepper.eval(t + h0, y + h0 * fy, f1);
    const double d2 = scaled_norm(f1 - fy, zero, zero, opts) / h0;
    const double big = std::max(d1, d2);
    const double h1 = big <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / big, 1.0 / stepper.order());
    h = std::min(100.0 * h0, h1);
  }
  h = std::min(h, max_step);

  bool rejected_last = false;
  long steps = 0;
  while (t < t1) {
    if (++steps > opts.max_steps) throw NumericalError("exceeded the maximum number of integration steps");
    const double h_floor = 16.0 * kEps * std::max(std::abs(t), span);
    if (h < h_floor) throw StepSizeCollapse(t, h, y);
    // Stretch the step onto t1 rather than leave a sliver behind.
    const bool last = t + 1.01 * h >= t1;
    const double step = last ? t1 - t : h;

    const double err = stepper.attempt(t, y, fy, step, y_new, f_new);
    const bool fixed = opts.fixed_step > 0.0;
    if (fixed && !std::isfinite(err)) throw NumericalError("stage equations failed to converge at a fixed step");
    if (fixed || err <= 1.0) {
      const double t_new = last ? t1 : t + step;
      if (observe)
        for (; next_out != output_times.end() && *next_out <= t_new; ++next_out)
          observe(*next_out, hermite((*next_out - t) / step, step, y, fy, y_new, f_new));
      t = t_new;
      y.swap(y_new);
      fy.swap(f_new);
      ++stats.accepted;
      if (after_step && after_step(t, y)) {
        stepper.eval(t, y, fy);
        stepper.mark_jacobian_stale();
      }
      if (!fixed) {
        double grow = err > 0.0 ? kSafety * std::pow(err, -1.0 / stepper.order()) : kMaxGrow;
        grow = std::clamp(grow, kMinShrink, rejected_last ? 1.0 : kMaxGrow);
        h = std::min(max_step, step * grow);
      }
      rejected_last = false;
    } else {
      ++stats.rejected;
      const double shrink =
          std::isfinite(err) ? std::max(kMinShrink, kSafety * std::pow(err, -1.0 / stepper.order())) : 0.5;
      h = step * shrink;
      rejected_last = true;
    }
  }
  return {y, h};
}

}  // namespace cogdyn
