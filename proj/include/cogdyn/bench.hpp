#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cogdyn/arm_model.hpp"

namespace cogdyn {

struct BenchOptions {
  std::vector<int> sections{1, 2, 4, 8};  // sorted, at least two distinct counts
  int iterations = 200;                   // timed samples per model and section count
  int warmup = 20;
  std::uint64_t seed = 1;
  int step_sections = 3;                  // arm size for the step-rate figure
  SectionParams section;                  // repeated along the arm; zero mass picks the prototype section
};

struct Timing {
  double mean = 0.0;    // seconds per call
  double stddev = 0.0;
  double median = 0.0;  // robust to the occasional preempted sample
  int calls_per_sample = 1;
};

struct BenchRow {
  int sections = 0;
  Timing cog, oracle;
  double gain() const { return oracle.median / cog.median; }
};

struct BenchReport {
  std::vector<BenchRow> rows;
  int iterations = 0;
  double timer_resolution = 0.0;
  double cog_slope = 0.0;     // least-squares slope of log median time against log n
  double oracle_slope = 0.0;
  bool gain_increasing = false;  // oracle/CoG median ratio
  Timing step;                // CoG assemble + solve at step_sections
  int step_sections = 0;
  double step_rate() const { return 1.0 / step.median; }
};

// The lumped section used throughout the examples: L0 0.15 m, r 12.5 mm,
// 0.1 kg, 70 mm stroke, Ke 800 N/m and D 15 Ns/m per actuator.
SectionParams prototype_section();
ArmModel uniform_arm(int sections, const SectionParams& section);

// Throws ValidationError on an unsorted or too short section list. Samples
// that would be shorter than the clock can resolve are batched, so the
// reported means are per call regardless of the batch size.
BenchReport run_bench(const BenchOptions& opts);

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Columns: n, cog_mean_s, cog_std_s, cog_median_s, oracle_mean_s, oracle_std_s,
// oracle_median_s, gain.
std::string bench_csv(const BenchReport& report);
std::string bench_json(const BenchReport& report);

}  // namespace cogdyn
