#include "cogdyn/shaping_fit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include <Eigen/Dense>
#include <json.hpp>

#include "cogdyn/errors.hpp"

namespace cogdyn {
namespace {

constexpr std::size_t kChunk = 256;

class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : rng_(seed) {}
  double operator()(double lo, double hi) { return lo + (hi - lo) * unit_uniform(rng_()); }

 private:
  std::mt19937_64 rng_;
};

using Vec6d = Eigen::Matrix<double, kResidualCount, 1>;
using Mat6d = Eigen::Matrix<double, kResidualCount, kResidualCount>;

ShapingCoefficients from_group_vector(const Vec6d& b) {
  ShapingCoefficients c;
  for (int k = 0; k < kResidualCount; ++k) {
    switch (k) {
      case kResA: c.beta_v(0) = b(k); break;
      case kResB: c.beta_v(1) = b(k); break;
      case kResC: c.beta_v(2) = b(k); break;
      case kResD: c.beta_w(2) = b(k); break;
      case kResE: c.beta_w(0) = b(k); break;
      case kResF: c.beta_w(1) = b(k); break;
    }
  }
  return c;
}

// Minimizes the convex quadratic bᵀGb - 2 hᵀb over the box [0, 1]^6 by
// enumerating which face each coordinate sits on. 3^6 candidates are few
// enough that the exact optimum is cheaper than an iterative solver.
Vec6d box_least_squares(const Mat6d& G, const Vec6d& h) {
  Vec6d best = Vec6d::Zero();
  double best_value = std::numeric_limits<double>::infinity();
  int patterns = 1;
  for (int k = 0; k < kResidualCount; ++k) patterns *= 3;
  for (int code = 0; code < patterns; ++code) {
    std::array<int, kResidualCount> state{};  // 0 free, 1 at zero, 2 at one
    std::vector<int> free;
    Vec6d b = Vec6d::Zero();
    for (int k = 0, c = code; k < kResidualCount; ++k, c /= 3) {
      state[k] = c % 3;
      if (state[k] == 0) free.push_back(k);
      if (state[k] == 2) b(k) = 1.0;
    }
    if (!free.empty()) {
      const int nf = static_cast<int>(free.size());
      Eigen::MatrixXd Gf(nf, nf);
      Eigen::VectorXd rhs(nf);
      for (int a = 0; a < nf; ++a) {
        rhs(a) = h(free[a]) - G.row(free[a]).dot(b);
        for (int c = 0; c < nf; ++c) Gf(a, c) = G(free[a], free[c]);
      }
      const Eigen::VectorXd x = Gf.ldlt().solve(rhs);
      bool inside = true;
      for (int a = 0; a < nf; ++a) {
        inside = inside && x(a) >= 0.0 && x(a) <= 1.0;
        b(free[a]) = x(a);
      }
      if (!inside) continue;
    }
    const double value = b.dot(G * b) - 2.0 * h.dot(b);
    if (value < best_value) {
      best_value = value;
      best = b;
    }
  }
  return best;
}

}  // namespace

void parallel_chunks(std::size_t count, std::size_t chunk, int threads,
                     const std::function<void(std::size_t, std::size_t)>& body) {
  const std::size_t chunks = (count + chunk - 1) / chunk;
  unsigned workers = threads > 0 ? static_cast<unsigned>(threads) : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) body(c * chunk, std::min(count, (c + 1) * chunk));
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t c; (c = next.fetch_add(1)) < chunks;) {
      try {
        body(c * chunk, std::min(count, (c + 1) * chunk));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = chunks;
      }
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

SampleSet generate_samples(std::size_t count, std::uint64_t seed, double L0) {
  if (!(L0 > 0.0)) throw ValidationError("sample length scale must be positive");
  SampleSet set;
  set.seed = seed;
  set.samples.resize(count);
  UniformSource draw(seed);
  for (ShapingSample& s : set.samples) {
    const double alpha_r = draw(1.0 / 20.0, 0.5);
    const double alpha_l = draw(1.0 / 20.0, 6.0 * std::numbers::pi * alpha_r);
    s.L0 = L0;
    s.r = alpha_r * L0;
    s.l_max = alpha_l * L0;
    for (int j = 0; j < 3; ++j) s.q(j) = draw(0.0, s.l_max);
    for (int j = 0; j < 3; ++j) s.qdot(j) = draw(0.0, L0);
    for (int j = 0; j < 3; ++j) s.omega(j) = draw(-100.0, 100.0);
  }
  return set;
}

double EnergyGroups::kinetic_integral() const {
  double k = 0.0;
  for (double v : integral) k += v;
  return k;
}

double EnergyGroups::kinetic_cog(const ShapingCoefficients& c) const {
  double k = 0.0;
  for (int g = 0; g < kResidualCount; ++g) k += residual_beta(c, g) * cog[g];
  return k;
}

std::vector<EnergyGroups> evaluate_samples(const SampleSet& set, int quad_order, int threads) {
  gauss_legendre(quad_order);
  std::vector<EnergyGroups> rows(set.samples.size());
  // Mass scales every group alike, so a unit mass loses nothing.
  constexpr double kMass = 1.0;
  parallel_chunks(rows.size(), kChunk, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t n = begin; n < end; ++n) {
      const ShapingSample& s = set.samples[n];
      const ExactSection shape(s.L0, s.r);
      const ResidualTerms t = energy_residual_terms(shape, s.q, s.qdot, skew(s.omega), quad_order);
      const auto w = residual_weights(kMass, s.r);
      for (int g = 0; g < kResidualCount; ++g) {
        rows[n].integral[g] = w[g] * t[g].integral;
        rows[n].cog[g] = w[g] * t[g].cog;
      }
    }
  });
  return rows;
}

FitMethod parse_fit_method(const std::string& name) {
  if (name == "joint") return FitMethod::joint;
  if (name == "per-term") return FitMethod::per_term;
  throw ValidationError("fit method must be 'joint' or 'per-term', got '" + name + "'");
}

std::string to_string(FitMethod m) { return m == FitMethod::joint ? "joint" : "per-term"; }

FitObjective evaluate_objective(const std::vector<EnergyGroups>& rows, const ShapingCoefficients& c) {
  FitObjective o;
  double peak = 0.0, sum_abs = 0.0, max_abs = 0.0;
  for (const EnergyGroups& r : rows) {
    const double K = r.kinetic_integral();
    const double gap = K - r.kinetic_cog(c);
    peak = std::max(peak, K);
    o.sum_squared += gap * gap;
    sum_abs += std::abs(gap);
    max_abs = std::max(max_abs, std::abs(gap));
  }
  if (!rows.empty() && peak > 0.0) {
    o.mean_abs = sum_abs / static_cast<double>(rows.size()) / peak;
    o.max_abs = max_abs / peak;
  }
  return o;
}

FitReport fit_coefficients(const std::vector<EnergyGroups>& rows) {
  if (rows.size() < kResidualCount) throw ValidationError("need at least six samples to fit six coefficients");
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd X(n, kResidualCount);
  Eigen::VectorXd y(n);
  Vec6d cross = Vec6d::Zero(), self = Vec6d::Zero();
  for (Eigen::Index s = 0; s < n; ++s) {
    const EnergyGroups& r = rows[s];
    y(s) = r.kinetic_integral();
    for (int g = 0; g < kResidualCount; ++g) {
      X(s, g) = r.cog[g];
      cross(g) += r.integral[g] * r.cog[g];
      self(g) += r.cog[g] * r.cog[g];
    }
  }
  // A group that is zero on every sample leaves its coefficient free; it
  // stays at 1 and drops out of the joint solve.
  FitReport report;
  report.sample_count = rows.size();
  std::vector<int> active;
  for (int g = 0; g < kResidualCount; ++g) {
    report.determined[g] = self(g) > 0.0;
    if (report.determined[g]) active.push_back(g);
  }
  if (active.empty()) throw NumericalError("every residual group is zero on the sample set");

  Vec6d per_term = Vec6d::Ones(), joint = Vec6d::Ones();
  for (int g : active) per_term(g) = cross(g) / self(g);
  // Column scaling keeps the QR well conditioned when groups differ by decades.
  const int na = static_cast<int>(active.size());
  Eigen::MatrixXd Xs(n, na);
  for (int a = 0; a < na; ++a) Xs.col(a) = X.col(active[a]) / std::sqrt(self(active[a]));
  const Eigen::VectorXd solved = Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(Xs).solve(y);
  for (int a = 0; a < na; ++a) joint(active[a]) = solved(a) / std::sqrt(self(active[a]));
  report.joint = from_group_vector(joint);
  report.per_term = from_group_vector(per_term);

  const Mat6d G = X.transpose() * X;
  const Vec6d h = X.transpose() * y;
  report.clamped = from_group_vector(box_least_squares(G, h));

  ShapingCoefficients zero;
  zero.beta_w.setZero();
  zero.beta_v.setZero();
  report.joint_objective = evaluate_objective(rows, report.joint);
  report.per_term_objective = evaluate_objective(rows, report.per_term);
  report.clamped_objective = evaluate_objective(rows, report.clamped);
  report.unit_objective = evaluate_objective(rows, ShapingCoefficients::unscaled());
  report.zero_objective = evaluate_objective(rows, zero);
  return report;
}

namespace {

nlohmann::ordered_json to_json(const ShapingCoefficients& c) {
  nlohmann::ordered_json j;
  j["beta_w"] = {c.beta_w(0), c.beta_w(1), c.beta_w(2)};
  j["beta_v"] = {c.beta_v(0), c.beta_v(1), c.beta_v(2)};
  return j;
}

nlohmann::ordered_json to_json(const FitObjective& o) {
  nlohmann::ordered_json j;
  j["sum_squared"] = o.sum_squared;
  j["mean_abs_normalized"] = o.mean_abs;
  j["max_abs_normalized"] = o.max_abs;
  return j;
}

}  // namespace

std::string fit_report_json(const FitReport& r, FitMethod chosen, std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["samples"] = r.sample_count;
  j["seed"] = seed;
  j["method"] = to_string(chosen);
  j["joint"] = to_json(r.joint);
  j["joint"]["objective"] = to_json(r.joint_objective);
  j["per_term"] = to_json(r.per_term);
  j["per_term"]["objective"] = to_json(r.per_term_objective);
  j["clamped_unit_box"] = to_json(r.clamped);
  j["clamped_unit_box"]["objective"] = to_json(r.clamped_objective);
  j["unscaled_objective"] = to_json(r.unit_objective);
  j["zero_objective"] = to_json(r.zero_objective);
  return j.dump(2) + "\n";
}

ValidationStats validate_coefficients(const ShapingCoefficients& c, const Arm& arm, std::size_t count,
                                      std::uint64_t seed, int quad_order, int threads) {
  gauss_legendre(quad_order);
  const int dof = arm.dof();
  std::vector<VecX> qs(count), qds(count);
  UniformSource draw(seed);
  for (std::size_t n = 0; n < count; ++n) {
    qs[n].resize(dof);
    qds[n].resize(dof);
    for (int i = 0; i < arm.size(); ++i) {
      const SectionParams& s = arm.params(i);
      for (int j = 0; j < 3; ++j) qs[n](3 * i + j) = draw(0.0, s.l_max);
      for (int j = 0; j < 3; ++j) qds[n](3 * i + j) = draw(-s.L0, s.L0);
    }
  }
  return validate_states(c, arm, qs, qds, quad_order, threads);
}

ValidationStats validate_states(const ShapingCoefficients& c, const Arm& arm, const std::vector<VecX>& qs,
                                const std::vector<VecX>& qds, int quad_order, int threads) {
  if (qs.size() != qds.size()) throw ValidationError("validation needs one rate vector per configuration");
  const std::size_t count = qs.size();
  std::vector<double> integral(count), cog(count);
  parallel_chunks(count, kChunk / 8, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t n = begin; n < end; ++n) {
      require_state(arm, qs[n], qds[n]);
      integral[n] = total_kinetic(kinetic_integral(arm, qs[n], qds[n], quad_order));
      cog[n] = total_kinetic(kinetic_cog(arm, qs[n], qds[n], c));
    }
  });

  ValidationStats s;
  s.count = count;
  for (double k : integral) s.max_kinetic = std::max(s.max_kinetic, k);
  s.normalized_errors.resize(count);
  for (std::size_t n = 0; n < count; ++n) {
    const double e = s.max_kinetic > 0.0 ? (integral[n] - cog[n]) / s.max_kinetic : 0.0;
    s.normalized_errors[n] = e;
    s.mean_error += e;
    s.mean_abs_error += std::abs(e);
    s.max_abs_error = std::max(s.max_abs_error, std::abs(e));
  }
  if (count > 0) {
    s.mean_error /= static_cast<double>(count);
    s.mean_abs_error /= static_cast<double>(count);
  }
  return s;
}

std::vector<HistogramBin> histogram(const std::vector<double>& values, int bins) {
  if (bins < 1) throw ValidationError("histogram needs at least one bin");
  if (values.empty()) return {};
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it, hi = *hi_it;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / bins;
  std::vector<HistogramBin> out(bins);
  for (int b = 0; b < bins; ++b) {
    out[b].lo = lo + b * width;
    out[b].hi = b + 1 == bins ? hi : lo + (b + 1) * width;
  }
  for (double v : values) {
    const int b = std::min(bins - 1, static_cast<int>((v - lo) / width));
    ++out[b].count;
  }
  return out;
}

std::string histogram_csv(const std::vector<HistogramBin>& bins) {
  std::string out = "bin_lo,bin_hi,count\n";
  char line[96];
  for (const HistogramBin& b : bins) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%zu\n", b.lo, b.hi, b.count);
    out += line;
  }
  return out;
}

std::string validation_json(const ValidationStats& s, const ShapingCoefficients& c, std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["samples"] = s.count;
  j["seed"] = seed;
  j["coefficients"] = to_json(c);
  j["max_integral_kinetic_energy"] = s.max_kinetic;
  j["mean_normalized_error"] = s.mean_error;
  j["mean_abs_normalized_error"] = s.mean_abs_error;
  j["max_abs_normalized_error"] = s.max_abs_error;
  return j.dump(2) + "\n";
}

}  // namespace cogdyn
