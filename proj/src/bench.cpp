#include "cogdyn/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include <json.hpp>

#include "cogdyn/eom.hpp"
#include "cogdyn/errors.hpp"
#include "cogdyn/oracle.hpp"
#include "cogdyn/shaping_fit.hpp"

namespace cogdyn {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Smallest observable clock increment, taken over a few trials.
double clock_resolution() {
  double best = 1.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = Clock::now();
    auto b = Clock::now();
    while (b == a) b = Clock::now();
    best = std::min(best, std::chrono::duration<double>(b - a).count());
  }
  return best;
}

// Raises the batch size until one batch spans many clock ticks, then records
// `iterations` batches and reports per-call statistics.
template <typename Body>
Timing time_calls(Body&& body, int iterations, int warmup, double resolution) {
  // Run the warm-up count, and at least a few milliseconds, so caches and
  // clock frequency settle before anything is recorded.
  const auto warm_start = Clock::now();
  for (int k = 0; k < warmup || seconds_since(warm_start) < 0.02; ++k) body();
  const double min_batch = std::max(1000.0 * resolution, 2e-5);
  int calls = 1;
  for (;;) {
    const auto start = Clock::now();
    for (int k = 0; k < calls; ++k) body();
    if (seconds_since(start) >= min_batch || calls >= (1 << 20)) break;
    calls *= 2;
  }
  std::vector<double> per_call(iterations);
  for (double& s : per_call) {
    const auto start = Clock::now();
    for (int k = 0; k < calls; ++k) body();
    s = seconds_since(start) / calls;
  }
  Timing t;
  t.calls_per_sample = calls;
  for (double s : per_call) t.mean += s;
  t.mean /= iterations;
  for (double s : per_call) t.stddev += (s - t.mean) * (s - t.mean);
  t.stddev = iterations > 1 ? std::sqrt(t.stddev / (iterations - 1)) : 0.0;
  std::sort(per_call.begin(), per_call.end());
  const std::size_t mid = per_call.size() / 2;
  t.median = per_call.size() % 2 ? per_call[mid] : 0.5 * (per_call[mid - 1] + per_call[mid]);
  return t;
}

struct StatePool {
  std::vector<VecX> q, qdot;
  std::size_t next = 0;
  std::pair<const VecX&, const VecX&> take() {
    const std::size_t k = next++ % q.size();
    return {q[k], qdot[k]};
  }
};

StatePool random_states(const ArmModel& model, std::uint64_t seed, int count = 16) {
  std::mt19937_64 rng(seed);
  StatePool pool;
  for (int s = 0; s < count; ++s) {
    VecX q(model.dof()), qd(model.dof());
    for (int i = 0; i < model.size(); ++i) {
      const SectionParams& p = model.sections[i];
      for (int j = 0; j < 3; ++j) {
        q(3 * i + j) = p.l_max * unit_uniform(rng());
        qd(3 * i + j) = p.L0 * (2.0 * unit_uniform(rng()) - 1.0);
      }
    }
    pool.q.push_back(std::move(q));
    pool.qdot.push_back(std::move(qd));
  }
  return pool;
}

}  // namespace

SectionParams prototype_section() {
  SectionParams s;
  s.L0 = 0.15;
  s.r = 0.0125;
  s.mass = 0.1;
  s.l_max = 0.07;
  s.Ke = 800.0 * Mat3::Identity();
  s.D = 15.0 * Mat3::Identity();
  return s;
}

ArmModel uniform_arm(int sections, const SectionParams& section) {
  ArmModel m;
  m.sections.assign(sections, section);
  return m;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("slope needs at least two matching points");
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += std::log(x[k]);
    my += std::log(y[k]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = std::log(x[k]) - mx;
    sxy += dx * (std::log(y[k]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw ValidationError("slope needs distinct abscissae");
  return sxy / sxx;
}

BenchReport run_bench(const BenchOptions& opts) {
  const auto& ns = opts.sections;
  if (ns.size() < 2) throw ValidationError("bench needs at least two section counts");
  if (!std::is_sorted(ns.begin(), ns.end()) || std::adjacent_find(ns.begin(), ns.end()) != ns.end())
    throw ValidationError("bench section counts must be strictly increasing");
  if (ns.front() < 1) throw ValidationError("bench section counts must be positive");
  if (opts.iterations < 1 || opts.warmup < 0) throw ValidationError("bench iterations must be positive");

  const SectionParams section = opts.section.mass > 0.0 ? opts.section : prototype_section();
  BenchReport report;
  report.iterations = opts.iterations;
  report.timer_resolution = clock_resolution();

  std::vector<double> n_values, cog_medians, oracle_medians;
  for (int n : ns) {
    const Arm arm(uniform_arm(n, section));
    CogDynamics cog(arm, ShapingCoefficients::unscaled());
    IntegralDynamics integral(arm);
    StatePool states = random_states(arm.model(), opts.seed + n);

    BenchRow row;
    row.sections = n;
    row.cog = time_calls(
        [&] {
          auto [q, qd] = states.take();
          cog.assemble(q, qd);
        },
        opts.iterations, opts.warmup, report.timer_resolution);
    row.oracle = time_calls(
        [&] {
          auto [q, qd] = states.take();
          integral.assemble(q, qd);
        },
        opts.iterations, opts.warmup, report.timer_resolution);
    report.rows.push_back(row);
    n_values.push_back(n);
    cog_medians.push_back(row.cog.median);
    oracle_medians.push_back(row.oracle.median);
  }
  report.cog_slope = loglog_slope(n_values, cog_medians);
  report.oracle_slope = loglog_slope(n_values, oracle_medians);
  report.gain_increasing = true;
  for (std::size_t k = 1; k < report.rows.size(); ++k)
    if (report.rows[k].gain() <= report.rows[k - 1].gain()) report.gain_increasing = false;

  const Arm arm(uniform_arm(opts.step_sections, section));
  CogDynamics cog(arm, ShapingCoefficients::unscaled());
  StatePool states = random_states(arm.model(), opts.seed);
  const VecX tau = VecX::Zero(arm.dof());
  report.step_sections = opts.step_sections;
  report.step = time_calls(
      [&] {
        auto [q, qd] = states.take();
        cog.forward_dynamics(q, qd, tau);
      },
      opts.iterations, opts.warmup, report.timer_resolution);
  return report;
}

std::string bench_csv(const BenchReport& report) {
  std::string out = "n,cog_mean_s,cog_std_s,cog_median_s,oracle_mean_s,oracle_std_s,oracle_median_s,gain\n";
  char line[256];
  for (const BenchRow& r : report.rows) {
    std::snprintf(line, sizeof line, "%d,%.6e,%.6e,%.6e,%.6e,%.6e,%.6e,%.6f\n", r.sections, r.cog.mean,
                  r.cog.stddev, r.cog.median, r.oracle.mean, r.oracle.stddev, r.oracle.median, r.gain());
    out += line;
  }
  return out;
}

std::string bench_json(const BenchReport& report) {
  nlohmann::ordered_json j;
  j["iterations"] = report.iterations;
  j["timer_resolution_s"] = report.timer_resolution;
  auto& rows = j["rows"] = nlohmann::ordered_json::array();
  for (const BenchRow& r : report.rows) {
    rows.push_back({{"n", r.sections},
                    {"cog_mean_s", r.cog.mean},
                    {"cog_std_s", r.cog.stddev},
                    {"cog_median_s", r.cog.median},
                    {"cog_calls_per_sample", r.cog.calls_per_sample},
                    {"oracle_mean_s", r.oracle.mean},
                    {"oracle_std_s", r.oracle.stddev},
                    {"oracle_median_s", r.oracle.median},
                    {"oracle_calls_per_sample", r.oracle.calls_per_sample},
                    {"gain", r.gain()}});
  }
  j["cog_slope"] = report.cog_slope;
  j["oracle_slope"] = report.oracle_slope;
  j["gain_increasing"] = report.gain_increasing;
  j["step"] = {{"sections", report.step_sections},
               {"mean_s", report.step.mean},
               {"std_s", report.step.stddev},
               {"median_s", report.step.median},
               {"rate_hz", report.step_rate()}};
  return j.dump(2) + "\n";
}

}  // namespace cogdyn
