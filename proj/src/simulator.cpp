#include "cogdyn/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "cogdyn/chain.hpp"
#include "cogdyn/eom.hpp"
#include "cogdyn/io.hpp"
#include "cogdyn/oracle.hpp"

namespace cogdyn {
namespace {

using Clock = std::chrono::steady_clock;

// Layout of the integrated state: q, qdot, input work, dissipated energy and,
// with a lag, the filtered forces.
struct StateLayout {
  int dof = 0;
  bool lagged = false;
  int size() const { return 2 * dof + 2 + (lagged ? dof : 0); }
  int work() const { return 2 * dof; }
  int dissipated() const { return 2 * dof + 1; }
  int force() const { return 2 * dof + 2; }
};

struct ModelHooks {
  std::function<VecX(const VecX& q, const VecX& qdot, const VecX& tau)> accel;
  std::function<double(const VecX& q, const VecX& qdot)> kinetic;
};

std::vector<double> event_breaks(const InputProfile& profile, double t0, double t1) {
  std::vector<double> breaks{t0};
  for (const InputEvent& e : profile.events)
    if (e.t > t0 && e.t < t1 && e.t != breaks.back()) breaks.push_back(e.t);
  breaks.push_back(t1);
  return breaks;
}

std::vector<double> output_grid(double t0, double t1, double dt) {
  std::vector<double> grid;
  const long steps = static_cast<long>(std::floor((t1 - t0) / dt + 1e-9));
  grid.reserve(static_cast<std::size_t>(steps) + 2);
  for (long k = 0; k <= steps; ++k) grid.push_back(t0 + static_cast<double>(k) * dt);
  if (t1 - grid.back() > 1e-9 * dt) grid.push_back(t1);
  return grid;
}

VecX clamp_configuration(const Arm& arm, const VecX& q) {
  VecX out = q;
  for (int i = 0; i < arm.size(); ++i)
    for (int j = 0; j < 3; ++j) out(3 * i + j) = std::clamp(q(3 * i + j), 0.0, arm.params(i).l_max);
  return out;
}

Trajectory run(const Arm& arm, const ModelHooks& model, const InputProfile& profile, double t0, double t1,
               const JointState& initial, const SimulationOptions& opts) {
  const int dof = arm.dof();
  profile.validate(dof);
  require_state(arm, initial.q, initial.qdot);
  if (!(t1 > t0)) throw ValidationError("simulation needs t1 > t0");
  if (!(opts.output_dt > 0.0)) throw ValidationError("output interval must be positive");

  const StateLayout layout{dof, profile.lag > 0.0};
  const bool clamp = arm.model().range_policy == RangePolicy::clamp;
  const MatX D = damping_matrix(arm);

  VecX command = VecX::Zero(dof);
  const OdeRhs rhs = [&](double, const VecX& y, VecX& dy) {
    const VecX q = clamp ? clamp_configuration(arm, y.head(dof)) : VecX(y.head(dof));
    const auto qdot = y.segment(dof, dof);
    const VecX tau = layout.lagged ? VecX(y.segment(layout.force(), dof)) : command;
    dy.resize(layout.size());
    dy.head(dof) = qdot;
    dy.segment(dof, dof) = model.accel(q, qdot, tau);
    dy(layout.work()) = qdot.dot(tau);
    dy(layout.dissipated()) = qdot.dot(D * qdot);
    if (layout.lagged) dy.segment(layout.force(), dof) = (command - y.segment(layout.force(), dof)) / profile.lag;
  };

  Trajectory traj;
  traj.sections = arm.size();
  const auto start = Clock::now();
  ChainKinematics chain;
  const OdeObserver observe = [&](double t, const VecX& y) {
    // Dense output can dip past a stop between projected step ends; the log
    // reports what the model evaluates.
    const VecX q = clamp ? clamp_configuration(arm, y.head(dof)) : VecX(y.head(dof));
    const VecX qdot = y.segment(dof, dof);
    chain_kinematics(arm, q, Derivs::none, chain);
    std::vector<Vec3> tips(arm.size());
    for (int i = 0; i < arm.size(); ++i) tips[i] = chain.tip[i].p;
    traj.t.push_back(t);
    traj.q.push_back(q);
    traj.qdot.push_back(qdot);
    traj.tips.push_back(std::move(tips));
    traj.kinetic.push_back(model.kinetic(q, qdot));
    traj.potential.push_back(potential(arm, q).total());
    traj.input_work.push_back(y(layout.work()));
    traj.dissipated.push_back(y(layout.dissipated()));
    const double wall = std::chrono::duration<double>(Clock::now() - start).count();
    traj.rtf.push_back(t > t0 && wall > 0.0 ? (t - t0) / wall : 0.0);
  };

  const OdeStepHook check_range = [&](double t, VecX& y) {
    bool changed = false;
    for (int i = 0; i < arm.size(); ++i) {
      const double l_max = arm.params(i).l_max;
      const double slack = 1e-12 * l_max;
      for (int j = 0; j < 3; ++j) {
        double& l = y(3 * i + j);
        double& rate = y(dof + 3 * i + j);
        if (l >= -slack && l <= l_max + slack) continue;
        if (!clamp) {
          std::ostringstream os;
          os.precision(10);
          os << "actuator l_" << i + 1 << j + 1 << " = " << l << " m left [0, " << l_max << "] at t = " << t
             << " s (set out_of_range to \"clamp\" to project instead)";
          throw NumericalError(os.str());
        }
        const bool low = l < 0.0;
        l = low ? 0.0 : l_max;
        if ((low && rate < 0.0) || (!low && rate > 0.0)) rate = 0.0;
        changed = true;
      }
    }
    if (changed) ++traj.clamp_corrections;
    return changed;
  };

  VecX y = VecX::Zero(layout.size());
  y.head(dof) = initial.q;
  y.segment(dof, dof) = initial.qdot;

  const std::vector<double> grid = output_grid(t0, t1, opts.output_dt);
  const std::vector<double> breaks = event_breaks(profile, t0, t1);
  OdeOptions ode = opts.ode;
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double ta = breaks[s], tb = breaks[s + 1];
    command = profile.command(ta, dof);
    // Later segments start on the previous end point, which was already logged.
    std::vector<double> outputs;
    for (double t : grid)
      if ((s == 0 ? t >= ta : t > ta) && t <= tb) outputs.push_back(t);
    const OdeSegment seg = integrate(rhs, ta, tb, y, ode, traj.stats, outputs, observe, check_range);
    y = seg.y;
    if (ode.fixed_step <= 0.0) ode.initial_step = seg.last_step;
  }
  traj.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return traj;
}

double json_number(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ValidationError(std::string("scenario key '") + key + "' must be a number");
  return j.at(key).get<double>();
}

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> known, const char* where) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
      throw ValidationError(std::string("unknown key '") + key + "' in " + where);
  }
}

VecX json_vector(const nlohmann::json& j, int size, const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != size)
    throw ValidationError(std::string(what) + " must be an array of " + std::to_string(size) + " numbers");
  VecX v(size);
  for (int k = 0; k < size; ++k) {
    if (!j[k].is_number()) throw ValidationError(std::string(what) + " must hold numbers");
    v(k) = j[k].get<double>();
  }
  return v;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

VecX InputProfile::command(double t, int dof) const {
  VecX cmd = VecX::Zero(dof);
  for (const InputEvent& e : events)
    if (e.t <= t) cmd(e.joint) = e.force;
  return cmd;
}

void InputProfile::validate(int dof) const {
  if (!(lag >= 0.0) || !std::isfinite(lag)) throw ValidationError("force lag must be a finite non-negative time");
  for (std::size_t k = 0; k < events.size(); ++k) {
    const InputEvent& e = events[k];
    if (!std::isfinite(e.t) || !std::isfinite(e.force)) throw ValidationError("input events must be finite");
    if (e.joint < 0 || e.joint >= dof)
      throw ValidationError("input event joint " + std::to_string(e.joint + 1) + " outside 1.." + std::to_string(dof));
    if (k > 0 && e.t < events[k - 1].t) throw ValidationError("input event times must be nondecreasing");
  }
}

InputEvent pressure_step(double t, int section, int actuator, double kpa, const PressureMap& map) {
  if (section < 1 || actuator < 1 || actuator > 3) throw ValidationError("pressure events address l_ij with i >= 1, j in 1..3");
  return {t, 3 * (section - 1) + (actuator - 1), map.force(kpa)};
}

InputProfile scenario_from_experiment(int id, const ArmModel& model, const PressureMap& map) {
  if (model.size() != 3)
    throw ValidationError("experiment scenarios need a three-section arm, got " + std::to_string(model.size()));
  InputProfile p;
  switch (id) {
    case 1:
      p.events = {pressure_step(0.0, 3, 3, 600.0, map), pressure_step(3.2, 2, 2, 500.0, map),
                  pressure_step(7.55, 1, 1, 500.0, map)};
      break;
    case 2:
      p.events = {pressure_step(0.0, 2, 3, 300.0, map), pressure_step(3.3, 3, 3, 500.0, map)};
      break;
    case 3:
      p.events = {pressure_step(0.0, 3, 3, 500.0, map), pressure_step(2.55, 2, 3, 300.0, map),
                  pressure_step(5.05, 1, 1, 300.0, map)};
      break;
    default:
      throw ValidationError("experiment id must be 1, 2 or 3");
  }
  return p;
}

double experiment_horizon(int id) {
  switch (id) {
    case 1: return 7.9;
    case 2: return 6.5;
    case 3: return 7.5;
  }
  throw ValidationError("experiment id must be 1, 2 or 3");
}

double Trajectory::real_time_factor() const {
  if (t.size() < 2 || wall_seconds <= 0.0) return 0.0;
  return (t.back() - t.front()) / wall_seconds;
}

Trajectory simulate(const Arm& arm, const ShapingCoefficients& coeffs, const InputProfile& profile, double t0,
                    double t1, const JointState& initial, const SimulationOptions& opts) {
  CogDynamics dyn(arm, coeffs);
  ModelHooks hooks;
  hooks.accel = [&](const VecX& q, const VecX& qdot, const VecX& tau) { return VecX(dyn.forward_dynamics(q, qdot, tau)); };
  hooks.kinetic = [&](const VecX& q, const VecX& qdot) { return 0.5 * qdot.dot(dyn.inertia(q) * qdot); };
  return run(arm, hooks, profile, t0, t1, initial, opts);
}

Trajectory simulate_integral(const Arm& arm, int quad_order, const InputProfile& profile, double t0, double t1,
                             const JointState& initial, const SimulationOptions& opts) {
  IntegralDynamics dyn(arm, quad_order);
  ModelHooks hooks;
  hooks.accel = [&](const VecX& q, const VecX& qdot, const VecX& tau) { return VecX(dyn.forward_dynamics(q, qdot, tau)); };
  hooks.kinetic = [&](const VecX& q, const VecX& qdot) { return 0.5 * qdot.dot(dyn.inertia(q) * qdot); };
  return run(arm, hooks, profile, t0, t1, initial, opts);
}

VecX static_equilibrium(const Arm& arm, const VecX& tau) {
  const int dof = arm.dof();
  if (tau.size() != dof) throw ValidationError("equilibrium force has the wrong length");
  CogDynamics dyn(arm, ShapingCoefficients::unscaled());
  VecX q = VecX::Zero(dof);
  MatX J(dof, dof);
  for (int it = 0; it < 50; ++it) {
    const VecX residual = dyn.gravity_elastic(q) - tau;
    constexpr double h = 1e-7;
    for (int k = 0; k < dof; ++k) {
      VecX qp = q, qm = q;
      qp(k) += h;
      qm(k) -= h;
      J.col(k) = (dyn.gravity_elastic(qp) - dyn.gravity_elastic(qm)) / (2.0 * h);
    }
    const VecX step = J.partialPivLu().solve(residual);
    q -= step;
    if (!q.allFinite()) break;
    if (step.norm() < 1e-14 * (1.0 + q.norm())) {
      if (!validate_configuration(arm.model(), q).empty())
        throw NumericalError("static equilibrium lies outside the actuator range: " +
                             describe(validate_configuration(arm.model(), q).front()));
      return q;
    }
  }
  throw NumericalError("static equilibrium did not converge");
}

std::string trajectory_csv(const Trajectory& traj) {
  const int dof = 3 * traj.sections;
  std::string out = "t";
  for (int k = 1; k <= dof; ++k) out += ",q_" + std::to_string(k);
  for (int k = 1; k <= dof; ++k) out += ",qd_" + std::to_string(k);
  for (int i = 1; i <= traj.sections; ++i)
    for (const char* axis : {"_x", "_y", "_z"}) out += ",tip" + std::to_string(i) + axis;
  out += ",K,P,rtf\n";
  for (std::size_t r = 0; r < traj.size(); ++r) {
    out += format_double(traj.t[r]);
    for (int k = 0; k < dof; ++k) out += "," + format_double(traj.q[r](k));
    for (int k = 0; k < dof; ++k) out += "," + format_double(traj.qdot[r](k));
    for (const Vec3& p : traj.tips[r])
      for (int a = 0; a < 3; ++a) out += "," + format_double(p(a));
    out += "," + format_double(traj.kinetic[r]) + "," + format_double(traj.potential[r]) + "," +
           format_double(traj.rtf[r]) + "\n";
  }
  return out;
}

Scenario load_scenario(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("scenario is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_object()) throw ValidationError("scenario must hold a JSON object");
  reject_unknown_keys(j, {"arm", "coefficients", "t_span", "experiment", "pressure_map", "events", "lag", "initial",
                          "solver", "output_dt", "description"},
                      "scenario");
  const std::filesystem::path base = path.parent_path();
  Scenario s;
  if (!j.contains("arm") || !j["arm"].is_string()) throw ValidationError("scenario needs an 'arm' file path");
  s.arm_path = (base / j["arm"].get<std::string>()).lexically_normal();
  s.model = load_arm_config(s.arm_path);
  if (j.contains("coefficients")) {
    if (!j["coefficients"].is_string()) throw ValidationError("'coefficients' must be a file path");
    s.coefficients_path = (base / j["coefficients"].get<std::string>()).lexically_normal();
    const std::string bytes = read_text_file(s.coefficients_path);
    s.coefficients = parse_coefficients(bytes);
    s.coefficients_hash = content_hash(bytes);
  }

  if (j.contains("pressure_map")) {
    const auto& m = j["pressure_map"];
    if (!m.is_object()) throw ValidationError("'pressure_map' must be an object");
    reject_unknown_keys(m, {"gain_n_per_kpa", "offset_n"}, "pressure_map");
    PressureMap map;
    map.gain = json_number(m, "gain_n_per_kpa", map.gain);
    map.offset = json_number(m, "offset_n", map.offset);
    s.pressure_map = map;
  }

  if (j.contains("experiment")) {
    if (!j["experiment"].is_number_integer()) throw ValidationError("'experiment' must be 1, 2 or 3");
    const int id = j["experiment"].get<int>();
    s.profile = scenario_from_experiment(id, s.model, s.pressure_map.value_or(PressureMap{}));
    s.t1 = experiment_horizon(id);
  }
  if (j.contains("events")) {
    if (!j["events"].is_array()) throw ValidationError("'events' must be an array");
    for (const auto& e : j["events"]) {
      if (!e.is_object()) throw ValidationError("each event must be an object");
      reject_unknown_keys(e, {"t", "section", "actuator", "joint", "pressure_kpa", "force_n"}, "event");
      const double t = json_number(e, "t", NAN);
      if (!std::isfinite(t)) throw ValidationError("each event needs a time 't'");
      const bool by_joint = e.contains("joint");
      if (by_joint == (e.contains("section") || e.contains("actuator")))
        throw ValidationError("an event names either 'joint' or 'section' and 'actuator'");
      if (e.contains("pressure_kpa") == e.contains("force_n"))
        throw ValidationError("an event carries exactly one of 'pressure_kpa' and 'force_n'");
      int joint;
      if (by_joint) {
        joint = static_cast<int>(json_number(e, "joint", 0)) - 1;
      } else {
        const int section = static_cast<int>(json_number(e, "section", 0));
        const int actuator = static_cast<int>(json_number(e, "actuator", 0));
        joint = pressure_step(0.0, section, actuator, 0.0, PressureMap{}).joint;
      }
      double force;
      if (e.contains("pressure_kpa")) {
        if (!s.pressure_map) throw ValidationError("pressure events need a 'pressure_map'");
        force = s.pressure_map->force(json_number(e, "pressure_kpa", 0.0));
      } else {
        force = json_number(e, "force_n", 0.0);
      }
      s.profile.events.push_back({t, joint, force});
    }
    std::stable_sort(s.profile.events.begin(), s.profile.events.end(),
                     [](const InputEvent& a, const InputEvent& b) { return a.t < b.t; });
  }
  s.profile.lag = json_number(j, "lag", 0.0);

  if (j.contains("t_span")) {
    const VecX span = json_vector(j["t_span"], 2, "'t_span'");
    s.t0 = span(0);
    s.t1 = span(1);
  }
  if (!(s.t1 > s.t0)) throw ValidationError("'t_span' must be increasing");

  const int dof = s.model.dof();
  if (j.contains("initial")) {
    const auto& init = j["initial"];
    if (init.is_string()) {
      if (init.get<std::string>() != "equilibrium") throw ValidationError("'initial' must be \"equilibrium\" or an object");
    } else if (init.is_object()) {
      reject_unknown_keys(init, {"q", "qdot"}, "initial");
      s.start_at_equilibrium = false;
      s.initial.q = init.contains("q") ? json_vector(init["q"], dof, "'initial.q'") : VecX::Zero(dof);
      s.initial.qdot = init.contains("qdot") ? json_vector(init["qdot"], dof, "'initial.qdot'") : VecX::Zero(dof);
    } else {
      throw ValidationError("'initial' must be \"equilibrium\" or an object");
    }
  }

  if (j.contains("solver")) {
    const auto& sv = j["solver"];
    if (!sv.is_object()) throw ValidationError("'solver' must be an object");
    reject_unknown_keys(sv, {"method", "rtol", "atol", "max_step"}, "solver");
    if (sv.contains("method")) {
      if (!sv["method"].is_string()) throw ValidationError("'solver.method' must be a string");
      s.options.ode.method = parse_ode_method(sv["method"].get<std::string>());
    }
    s.options.ode.rtol = json_number(sv, "rtol", s.options.ode.rtol);
    s.options.ode.atol = json_number(sv, "atol", s.options.ode.atol);
    s.options.ode.max_step = json_number(sv, "max_step", 0.0);
  }
  if (!(s.options.ode.rtol > 0.0 && s.options.ode.atol > 0.0)) throw ValidationError("solver tolerances must be positive");
  s.options.output_dt = json_number(j, "output_dt", s.options.output_dt);
  if (!(s.options.output_dt > 0.0)) throw ValidationError("'output_dt' must be positive");
  s.profile.validate(dof);
  return s;
}

JointState initial_state(const Scenario& scenario, const Arm& arm) {
  if (!scenario.start_at_equilibrium) return scenario.initial;
  const double before = std::nextafter(scenario.t0, -std::numeric_limits<double>::infinity());
  return {static_equilibrium(arm, scenario.profile.command(before, arm.dof())), VecX::Zero(arm.dof())};
}

Trajectory run_scenario(const Scenario& scenario) {
  const Arm arm(scenario.model);
  return simulate(arm, scenario.coefficients, scenario.profile, scenario.t0, scenario.t1,
                  initial_state(scenario, arm), scenario.options);
}

std::string simulation_summary_json(const Trajectory& traj, const Scenario& scenario) {
  nlohmann::ordered_json j;
  j["arm"] = scenario.arm_path.string();
  j["sections"] = traj.sections;
  j["coefficients"] = scenario.coefficients_path.empty() ? "unscaled" : scenario.coefficients_path.string();
  j["coefficients_hash"] = scenario.coefficients_hash;
  j["solver"] = to_string(scenario.options.ode.method);
  j["rtol"] = scenario.options.ode.rtol;
  j["atol"] = scenario.options.ode.atol;
  j["t_span"] = {scenario.t0, scenario.t1};
  j["samples"] = traj.size();
  j["accepted_steps"] = traj.stats.accepted;
  j["rejected_steps"] = traj.stats.rejected;
  j["rhs_evaluations"] = traj.stats.rhs_evaluations;
  j["jacobians"] = traj.stats.jacobians;
  j["clamp_corrections"] = traj.clamp_corrections;
  j["wall_seconds"] = traj.wall_seconds;
  j["real_time_factor"] = traj.real_time_factor();
  if (traj.size() > 0) {
    const std::size_t last = traj.size() - 1;
    const double e0 = traj.kinetic[0] + traj.potential[0];
    const double e1 = traj.kinetic[last] + traj.potential[last];
    j["energy"] = {{"initial", e0},
                   {"final", e1},
                   {"input_work", traj.input_work[last]},
                   {"dissipated", traj.dissipated[last]},
                   {"balance_residual", (e1 - e0) - (traj.input_work[last] - traj.dissipated[last])}};
    nlohmann::ordered_json tips = nlohmann::json::array();
    for (const Vec3& p : traj.tips[last]) tips.push_back({p(0), p(1), p(2)});
    j["final_tips"] = tips;
  }
  return j.dump(2) + "\n";
}

}  // namespace cogdyn
