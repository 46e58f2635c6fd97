#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "cogdyn/energy.hpp"
#include "cogdyn/io.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

const fs::path kData = COGDYN_DATA_DIR;

struct Outcome {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cogdyn_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Outcome run(const std::string& args) const {
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = std::string(COGDYN_CLI) + " " + args + " 2>" + err.string();
    Outcome r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err);
    return r;
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  // A short experiment-1 scenario with absolute paths into the data folder.
  fs::path short_scenario(double t1) const {
    Json j;
    j["arm"] = (kData / "arms/prototype_3.json").string();
    j["coefficients"] = (kData / "coefficients/fitted.json").string();
    j["experiment"] = 1;
    j["t_span"] = {0.0, t1};
    j["pressure_map"] = {{"gain_n_per_kpa", 0.06}, {"offset_n", 0.0}};
    j["initial"] = "equilibrium";
    const fs::path p = path("scenario.json");
    std::ofstream(p) << j.dump(2);
    return p;
  }

  fs::path dir_;
};

int csv_columns(const std::string& header) { return static_cast<int>(std::count(header.begin(), header.end(), ',')) + 1; }

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

}  // namespace

TEST_F(Cli, FitWithTheSameSeedIsByteIdentical) {
  const Outcome a = run("fit --samples 3000 --seed 11 --threads 1 --out " + path("a.json").string());
  const Outcome b = run("fit --samples 3000 --seed 11 --threads 3 --out " + path("b.json").string());
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  const std::string bytes = slurp(path("a.json"));
  EXPECT_EQ(bytes, slurp(path("b.json")));
  EXPECT_NO_THROW(cogdyn::parse_coefficients(bytes));
  // The report on stdout names the file's hash.
  EXPECT_EQ(Json::parse(a.out)["coefficients_hash"], cogdyn::content_hash(bytes));

  const Outcome c = run("fit --samples 3000 --seed 12 --out " + path("c.json").string());
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_NE(bytes, slurp(path("c.json")));
}

TEST_F(Cli, JointFitWithNonPositiveCoefficientsIsANumericalFailure) {
  const Outcome r = run("fit --samples 500 --seed 3 --method joint --out " + path("joint.json").string());
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(Json::parse(r.err)["error"], "numerical");
  EXPECT_FALSE(fs::exists(path("joint.json")));
}

TEST_F(Cli, UsageErrorsExitWithOne) {
  for (const std::string& args : std::vector<std::string>{"", "frobnicate", "fit", "fit --samples many --out x.json",
                                 "validate-energy --arm " + (kData / "arms/validation_10.json").string() +
                                     " --beta-ones --coeffs " + (kData / "coefficients/fitted.json").string() +
                                     " --out h.csv"}) {
    const Outcome r = run(args);
    EXPECT_EQ(r.code, 1) << args;
    EXPECT_EQ(Json::parse(r.err)["error"], "usage") << args;
  }
}

TEST_F(Cli, InvalidInputExitsWithTwo) {
  const fs::path bad = path("bad_arm.json");
  std::ofstream(bad) << R"({"sections": [{"L0": -1}]})";
  const Outcome r = run("validate-energy --arm " + bad.string() + " --beta-ones --out " + path("h.csv").string());
  EXPECT_EQ(r.code, 2);
  const Json err = Json::parse(r.err);
  EXPECT_EQ(err["error"], "validation");
  EXPECT_EQ(err["exit_code"], 2);

  const Outcome unsorted = run("bench --sections 2,1 --iterations 2 --out " + path("b.csv").string());
  EXPECT_EQ(unsorted.code, 2);
}

TEST_F(Cli, ValidateEnergyWritesHistogramAndSummary) {
  const fs::path coeffs = kData / "coefficients/fitted.json";
  const Outcome r = run("validate-energy --arm " + (kData / "arms/validation_10.json").string() + " --coeffs " +
                    coeffs.string() + " --samples 300 --seed 5 --bins 12 --out " + path("hist.csv").string() +
                    " --summary " + path("summary.json").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(path("hist.csv"));
  EXPECT_EQ(first_line(csv), "bin_lo,bin_hi,count");
  std::istringstream rows(csv);
  std::string line;
  std::getline(rows, line);
  int bins = 0;
  long total = 0;
  while (std::getline(rows, line)) {
    ++bins;
    total += std::stol(line.substr(line.rfind(',') + 1));
  }
  EXPECT_EQ(bins, 12);
  EXPECT_EQ(total, 300);

  const Json s = Json::parse(slurp(path("summary.json")));
  EXPECT_EQ(s["samples"], 300);
  EXPECT_LT(s["mean_abs_normalized_error"].get<double>(), 1e-3);
  EXPECT_GE(s["max_abs_normalized_error"].get<double>(), s["mean_abs_normalized_error"].get<double>());
  EXPECT_EQ(s["provenance"]["coefficients_hash"], cogdyn::content_hash(slurp(coeffs)));
}

TEST_F(Cli, SimulateWritesNineJointColumns) {
  const Outcome r =
      run("simulate --scenario " + short_scenario(0.25).string() + " --out " + path("traj.csv").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(path("traj.csv"));
  const std::string header = first_line(csv);
  EXPECT_EQ(csv_columns(header), 1 + 9 + 9 + 9 + 3);
  EXPECT_NE(header.find(",q_9,"), std::string::npos);
  EXPECT_EQ(header.find("q_10"), std::string::npos);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 251);

  const Json s = Json::parse(r.out);
  EXPECT_EQ(s["sections"], 3);
  EXPECT_GT(s["real_time_factor"].get<double>(), 0.0);
  EXPECT_EQ(s["coefficients_hash"], cogdyn::content_hash(slurp(kData / "coefficients/fitted.json")));

  // Artifacts are renamed into place, so no temporaries are left behind.
  for (const auto& entry : fs::directory_iterator(dir_))
    EXPECT_EQ(entry.path().filename().string().find(".tmp."), std::string::npos);
}

TEST_F(Cli, SimulateOverridesSolverSettings) {
  const Outcome r = run("simulate --scenario " + short_scenario(0.02).string() + " --method sdirk4 --rtol 1e-5 --beta-ones" +
                    " --out " + path("traj.csv").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const Json s = Json::parse(r.out);
  EXPECT_EQ(s["solver"], "sdirk4");
  EXPECT_EQ(s["rtol"], 1e-5);
  EXPECT_EQ(s["coefficients_hash"], "");

  const Outcome bad = run("simulate --scenario " + short_scenario(0.05).string() + " --rtol -1 --out " +
                      path("t.csv").string());
  EXPECT_EQ(bad.code, 2);
}

TEST_F(Cli, VersionEmbedsTheCoefficientHash) {
  const fs::path coeffs = kData / "coefficients/fitted.json";
  const Outcome r = run("--version --coeffs " + coeffs.string());
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("cogdyn ", 0), 0u);
  EXPECT_NE(r.out.find(cogdyn::content_hash(slurp(coeffs))), std::string::npos);
}

TEST_F(Cli, BenchWritesOneRowPerSectionCount) {
  const Outcome r = run("bench --sections 1,2 --iterations 3 --out " + path("bench.csv").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(path("bench.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  const Json s = Json::parse(r.out);
  EXPECT_EQ(s["rows"].size(), 2u);
  EXPECT_TRUE(s.contains("cog_slope"));
  EXPECT_EQ(s["step"]["sections"], 3);
}
