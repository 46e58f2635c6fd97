// Command-line front end: fit, validate-energy, simulate and bench.
//
// Exit codes: 0 success, 1 usage, 2 invalid input, 3 numerical failure.
// Failures print one JSON object on stderr.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cogdyn/arm.hpp"
#include "cogdyn/bench.hpp"
#include "cogdyn/errors.hpp"
#include "cogdyn/io.hpp"
#include "cogdyn/shaping_fit.hpp"
#include "cogdyn/simulator.hpp"

#ifndef COGDYN_VERSION
#define COGDYN_VERSION "dev"
#endif

namespace fs = std::filesystem;
using namespace cogdyn;
using Json = nlohmann::ordered_json;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kInvalid = 2, kNumerical = 3 };

int report_failure(ExitCode code, const std::string& kind, const std::string& message) {
  Json j;
  j["error"] = kind;
  j["message"] = message;
  j["exit_code"] = static_cast<int>(code);
  std::cerr << j.dump() << "\n";
  return code;
}

// Where the coefficients of a run came from, embedded in every summary.
struct CoefficientSource {
  ShapingCoefficients values = ShapingCoefficients::unscaled();
  std::string label = "unscaled";
  std::string hash;
};

CoefficientSource load_source(const std::string& path, bool beta_ones) {
  CoefficientSource src;
  if (beta_ones) return src;
  if (path.empty()) throw ValidationError("either --coeffs or --beta-ones is required");
  const std::string bytes = read_text_file(path);
  src.values = parse_coefficients(bytes);
  src.label = path;
  src.hash = content_hash(bytes);
  return src;
}

Json provenance(const CoefficientSource& src) {
  return {{"tool_version", COGDYN_VERSION}, {"coefficients", src.label}, {"coefficients_hash", src.hash}};
}

// Summaries go to a file when asked, otherwise to stdout.
void emit(const std::string& path, const std::string& text) {
  if (path.empty())
    std::cout << text;
  else
    write_file_atomic(path, text);
}

struct FitArgs {
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
  std::string method = "per-term";
  std::string out, report;
  int quad_order = kDefaultQuadratureOrder;
  int threads = 0;
};

void run_fit(const FitArgs& a) {
  const FitMethod method = parse_fit_method(a.method);
  const SampleSet set = generate_samples(a.samples, a.seed);
  const FitReport report = fit_coefficients(evaluate_samples(set, a.quad_order, a.threads));
  const ShapingCoefficients& chosen = report.coefficients(method);
  for (int k = 0; k < 3; ++k)
    if (!(chosen.beta_w(k) > 0.0) || !(chosen.beta_v(k) > 0.0))
      throw NumericalError(to_string(method) +
                           " fit produced a non-positive coefficient; the least-squares problem is ill-determined, "
                           "use --method per-term");
  write_file_atomic(a.out, serialize_coefficients(chosen));
  Json j = Json::parse(fit_report_json(report, method, a.seed));
  j["coefficients_file"] = a.out;
  j["coefficients_hash"] = content_hash(serialize_coefficients(chosen));
  j["tool_version"] = COGDYN_VERSION;
  emit(a.report, j.dump(2) + "\n");
}

struct ValidateArgs {
  std::string arm, coeffs, out, summary;
  bool beta_ones = false;
  std::size_t samples = 10000;
  std::uint64_t seed = 2;
  int bins = 40;
  int quad_order = kDefaultQuadratureOrder;
  int threads = 0;
};

void run_validate(const ValidateArgs& a) {
  const CoefficientSource src = load_source(a.coeffs, a.beta_ones);
  const Arm arm(load_arm_config(a.arm));
  const ValidationStats stats = validate_coefficients(src.values, arm, a.samples, a.seed, a.quad_order, a.threads);
  write_file_atomic(a.out, histogram_csv(histogram(stats.normalized_errors, a.bins)));
  Json j = Json::parse(validation_json(stats, src.values, a.seed));
  j["arm"] = a.arm;
  j["histogram"] = a.out;
  j["provenance"] = provenance(src);
  emit(a.summary, j.dump(2) + "\n");
}

struct SimulateArgs {
  std::string scenario, out, summary, coeffs;
  bool beta_ones = false;
  std::optional<double> rtol, atol;
  std::optional<std::string> method;
};

void run_simulate(const SimulateArgs& a) {
  Scenario sc = load_scenario(a.scenario);
  if (a.beta_ones || !a.coeffs.empty()) {
    const CoefficientSource src = load_source(a.coeffs, a.beta_ones);
    sc.coefficients = src.values;
    sc.coefficients_path = a.beta_ones ? fs::path() : fs::path(a.coeffs);
    sc.coefficients_hash = src.hash;
  }
  if (a.rtol) sc.options.ode.rtol = *a.rtol;
  if (a.atol) sc.options.ode.atol = *a.atol;
  if (a.method) sc.options.ode.method = parse_ode_method(*a.method);
  if (!(sc.options.ode.rtol > 0.0) || !(sc.options.ode.atol > 0.0))
    throw ValidationError("solver tolerances must be positive");

  const Trajectory traj = run_scenario(sc);
  write_file_atomic(a.out, trajectory_csv(traj));
  Json j = Json::parse(simulation_summary_json(traj, sc));
  j["trajectory"] = a.out;
  j["tool_version"] = COGDYN_VERSION;
  emit(a.summary, j.dump(2) + "\n");
}

struct BenchArgs {
  std::vector<int> sections{1, 2, 4, 8};
  int iterations = 200;
  std::uint64_t seed = 1;
  std::string arm, out, summary;
};

void run_benchmark(const BenchArgs& a) {
  BenchOptions opts;
  opts.sections = a.sections;
  opts.iterations = a.iterations;
  opts.seed = a.seed;
  if (!a.arm.empty()) opts.section = load_arm_config(a.arm).sections.front();
  const BenchReport report = run_bench(opts);
  write_file_atomic(a.out, bench_csv(report));
  Json j = Json::parse(bench_json(report));
  j["tool_version"] = COGDYN_VERSION;
  emit(a.summary, j.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Centre-of-gravity dynamics for multisection continuum arms"};
  app.require_subcommand(0, 1);
  bool show_version = false;
  std::string version_coeffs;
  app.add_flag("--version", show_version, "Print the tool version (and the hash of --coeffs if given)");
  app.add_option("--coeffs", version_coeffs, "Coefficient file to hash with --version");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the energy-shaping coefficients on random section samples");
  fit_cmd->add_option("--samples", fit.samples, "Number of training samples")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--seed", fit.seed, "Sampling seed");
  fit_cmd->add_option("--method", fit.method, "per-term or joint")->check(CLI::IsMember({"per-term", "joint"}));
  fit_cmd->add_option("--out", fit.out, "Coefficient file to write")->required();
  fit_cmd->add_option("--report", fit.report, "Fit report JSON (stdout if omitted)");
  fit_cmd->add_option("--quad-order", fit.quad_order, "Gauss-Legendre points for the integral energies");
  fit_cmd->add_option("--threads", fit.threads, "Worker cap, 0 for all cores")->check(CLI::NonNegativeNumber);

  ValidateArgs val;
  auto* val_cmd = app.add_subcommand("validate-energy", "Compare CoG and integral kinetic energies on a whole arm");
  val_cmd->add_option("--arm", val.arm, "Arm description")->required()->check(CLI::ExistingFile);
  auto* val_coeffs = val_cmd->add_option("--coeffs", val.coeffs, "Coefficient file")->check(CLI::ExistingFile);
  val_cmd->add_flag("--beta-ones", val.beta_ones, "Use unit coefficients")->excludes(val_coeffs);
  val_cmd->add_option("--samples", val.samples, "Number of random states")->check(CLI::PositiveNumber);
  val_cmd->add_option("--seed", val.seed, "State seed");
  val_cmd->add_option("--bins", val.bins, "Histogram bins")->check(CLI::PositiveNumber);
  val_cmd->add_option("--out", val.out, "Histogram CSV to write")->required();
  val_cmd->add_option("--summary", val.summary, "Summary JSON (stdout if omitted)");
  val_cmd->add_option("--quad-order", val.quad_order, "Gauss-Legendre points for the integral energies");
  val_cmd->add_option("--threads", val.threads, "Worker cap, 0 for all cores")->check(CLI::NonNegativeNumber);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Integrate a scenario file and write the trajectory CSV");
  sim_cmd->add_option("--scenario", sim.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--out", sim.out, "Trajectory CSV to write")->required();
  sim_cmd->add_option("--summary", sim.summary, "Summary JSON (stdout if omitted)");
  auto* sim_coeffs =
      sim_cmd->add_option("--coeffs", sim.coeffs, "Override the scenario's coefficient file")->check(CLI::ExistingFile);
  sim_cmd->add_flag("--beta-ones", sim.beta_ones, "Use unit coefficients")->excludes(sim_coeffs);
  sim_cmd->add_option("--rtol", sim.rtol, "Relative tolerance");
  sim_cmd->add_option("--atol", sim.atol, "Absolute tolerance");
  sim_cmd->add_option("--method", sim.method, "dopri5 or sdirk4")->check(CLI::IsMember({"dopri5", "sdirk4"}));
  int sim_threads = 0;
  sim_cmd->add_option("--threads", sim_threads, "Accepted for uniformity; one integration is sequential");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time CoG and integral assembly against section count");
  bench_cmd->add_option("--sections", bench.sections, "Section counts, increasing")->delimiter(',');
  bench_cmd->add_option("--iterations", bench.iterations, "Timed samples per point")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", bench.seed, "State seed");
  bench_cmd->add_option("--arm", bench.arm, "Take the repeated section from this arm")->check(CLI::ExistingFile);
  bench_cmd->add_option("--out", bench.out, "Timing CSV to write")->required();
  bench_cmd->add_option("--summary", bench.summary, "Summary JSON (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_failure(kUsage, "usage", e.what());
  }

  try {
    if (show_version) {
      std::cout << "cogdyn " << COGDYN_VERSION << "\n";
      if (!version_coeffs.empty())
        std::cout << "coefficients " << version_coeffs << " " << content_hash(read_text_file(version_coeffs)) << "\n";
      return kOk;
    }
    if (*fit_cmd)
      run_fit(fit);
    else if (*val_cmd)
      run_validate(val);
    else if (*sim_cmd)
      run_simulate(sim);
    else if (*bench_cmd)
      run_benchmark(bench);
    else
      return report_failure(kUsage, "usage", "a subcommand is required; see --help");
  } catch (const ValidationError& e) {
    return report_failure(kInvalid, "validation", e.what());
  } catch (const NumericalError& e) {
    return report_failure(kNumerical, "numerical", e.what());
  } catch (const std::exception& e) {
    return report_failure(kInvalid, "io", e.what());
  }
  return kOk;
}
