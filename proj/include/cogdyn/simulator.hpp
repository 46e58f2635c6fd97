#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cogdyn/arm.hpp"
#include "cogdyn/energy.hpp"
#include "cogdyn/ode.hpp"

namespace cogdyn {

// Affine actuator force model, force = gain * pressure + offset, with
// pressure in kPa. It only translates scenario pressures into forces.
struct PressureMap {
  double gain = 0.06;  // N per kPa
  double offset = 0.0; // N
  double force(double kpa) const { return gain * kpa + offset; }
};

// A step change of one joint force, held until the next event on that joint.
struct InputEvent {
  double t = 0.0;
  int joint = 0;  // 0-based index into q
  double force = 0.0;
};

struct InputProfile {
  std::vector<InputEvent> events;  // nondecreasing in time
  double lag = 0.0;                // first-order force lag time constant, 0 = off

  // Commanded forces after every event with time <= t.
  VecX command(double t, int dof) const;
  // Throws ValidationError on unsorted times, bad joints or a negative lag.
  void validate(int dof) const;
};

// Section and actuator are 1-based, matching l_{section,actuator}.
InputEvent pressure_step(double t, int section, int actuator, double kpa, const PressureMap& map);

// The three step-input experiments on a three-section arm. Throws
// ValidationError for any other section count or id.
InputProfile scenario_from_experiment(int id, const ArmModel& model, const PressureMap& map);
double experiment_horizon(int id);

struct SimulationOptions {
  OdeOptions ode;
  double output_dt = 1e-3;
};

struct Trajectory {
  int sections = 0;
  std::vector<double> t;
  std::vector<VecX> q, qdot;
  std::vector<std::vector<Vec3>> tips;  // world tip position of every section
  std::vector<double> kinetic, potential;
  std::vector<double> input_work, dissipated;  // accumulated from the start
  std::vector<double> rtf;                     // simulated / wall seconds so far
  OdeStats stats;
  int clamp_corrections = 0;
  double wall_seconds = 0.0;

  double real_time_factor() const;
  std::size_t size() const { return t.size(); }
};

// Forward dynamics of the CoG model under `profile`. Steps are not smoothed:
// the integrator restarts at every event time. Out-of-range actuator lengths
// follow the arm's range policy (NumericalError, or clamping with the
// outward rate removed).
Trajectory simulate(const Arm& arm, const ShapingCoefficients& coeffs, const InputProfile& profile, double t0,
                    double t1, const JointState& initial, const SimulationOptions& opts);
// Same driver on the quadrature model, for model comparisons.
Trajectory simulate_integral(const Arm& arm, int quad_order, const InputProfile& profile, double t0, double t1,
                             const JointState& initial, const SimulationOptions& opts);

// Solves G(q) = tau by Newton's method starting from q = 0.
VecX static_equilibrium(const Arm& arm, const VecX& tau);

// Header `t,q_1..,qd_1..,tip1_x..,K,P,rtf`.
std::string trajectory_csv(const Trajectory& traj);

struct Scenario {
  std::filesystem::path arm_path;
  std::filesystem::path coefficients_path;  // empty: unscaled coefficients
  ArmModel model;
  ShapingCoefficients coefficients;
  std::string coefficients_hash;  // hash of the coefficient file bytes, empty when unscaled
  InputProfile profile;
  std::optional<PressureMap> pressure_map;
  double t0 = 0.0;
  double t1 = 1.0;
  bool start_at_equilibrium = true;
  JointState initial;  // used when start_at_equilibrium is false
  SimulationOptions options;
};

// Paths inside the scenario resolve relative to the scenario file.
Scenario load_scenario(const std::filesystem::path& path);

// The scenario's starting state: the explicit one, or the static rest under
// the forces commanded strictly before t0, so an event at t0 still acts as a
// step.
JointState initial_state(const Scenario& scenario, const Arm& arm);
Trajectory run_scenario(const Scenario& scenario);

// Summary of a finished run as JSON: solver statistics, energy balance,
// real-time factor and the coefficient hash.
std::string simulation_summary_json(const Trajectory& traj, const Scenario& scenario);

}  // namespace cogdyn
