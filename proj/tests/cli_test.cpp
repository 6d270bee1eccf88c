#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "polarlock/experiment.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
};

Outcome run_cli(const std::string& args) {
  const std::string cmd = std::string(POLARLOCK_CLI) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) out += buf;
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::map<std::string, std::string> parse_summary(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const auto c = line.find(": ");
    if (c != std::string::npos) kv[line.substr(0, c)] = line.substr(c + 2);
  }
  return kv;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("polarlock_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, ValidatePasses) {
  const Outcome r = run_cli("validate");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("m45_coupler_decomposition: pass"), std::string::npos);
}

TEST_F(CliTest, MissingConfigIsConfigError) {
  const Outcome r = run_cli("run --config missing.file");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("missing.file"), std::string::npos) << r.out;
}

TEST_F(CliTest, UnknownSubcommandPrintsUsage) {
  const Outcome r = run_cli("frobnicate");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("validate"), std::string::npos) << r.out;
  EXPECT_EQ(run_cli("run --bogus").code, 1);
  EXPECT_EQ(run_cli("").code, 1);
}

TEST_F(CliTest, BadConfigKeyIsNamed) {
  std::ofstream(dir_ / "bad.cfg") << "anneal.bogus = 3\n";
  const Outcome r = run_cli("run --config " + (dir_ / "bad.cfg").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("anneal.bogus"), std::string::npos) << r.out;
}

TEST_F(CliTest, RunWithEmptyConfigWritesArtifacts) {
  std::ofstream(dir_ / "empty.cfg") << "";
  const fs::path out = dir_ / "run.csv";
  const Outcome r = run_cli("run --config " + (dir_ / "empty.cfg").string() + " --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(dir_ / "run_aggregate.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "run_summary.txt"));
  const std::string csv = slurp(out);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 501);
  EXPECT_NE(r.out.find("variant.variable.crossing_25db"), std::string::npos);
}

TEST_F(CliTest, RunIsByteIdenticalAcrossRunsAndThreadCounts) {
  std::ofstream(dir_ / "c.cfg") << "experiment.variants = variable, fixed:0.16\nexperiment.trials = 4\n";
  const std::string cfg = "--config " + (dir_ / "c.cfg").string();
  ASSERT_EQ(run_cli("run " + cfg + " --out " + (dir_ / "a.csv").string()).code, 0);
  ASSERT_EQ(run_cli("run " + cfg + " --out " + (dir_ / "b.csv").string()).code, 0);
  const std::string serial =
      "POLARLOCK_THREADS=1 " + std::string(POLARLOCK_CLI) + " run " + cfg + " --out " + (dir_ / "s.csv").string();
  ASSERT_EQ(std::system(serial.c_str()), 0);
  EXPECT_EQ(slurp(dir_ / "a.csv"), slurp(dir_ / "b.csv"));
  EXPECT_EQ(slurp(dir_ / "a.csv"), slurp(dir_ / "s.csv"));
}

TEST_F(CliTest, UnwritableOutputFails) {
  const Outcome r = run_cli("run --out /nonexistent_dir/x.csv");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("/nonexistent_dir/x.csv"), std::string::npos) << r.out;
}

TEST_F(CliTest, OracleForAlignedInput) {
  const Outcome r = run_cli("oracle --sop 1,0,0,0 --config /dev/null");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto kv = parse_summary(r.out);
  ASSERT_TRUE(kv.count("intensity"));
  // default device keeps the 28 dB ceiling
  EXPECT_NEAR(std::stod(kv.at("intensity")), 1.0 / (1.0 + std::pow(10.0, -2.8)), 1e-9);
  EXPECT_TRUE(kv.count("theta4"));
}

TEST_F(CliTest, SweepNoiseEmitsOneCsvPerValueWithFallingEr) {
  const fs::path out = dir_ / "sweep.csv";
  const Outcome r = run_cli("sweep --key noise_sigma --values 0,5e-4,5e-3 --trials 40 --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.out;
  double prev = 1e9;
  for (const std::string v : {"0", "5e-4", "5e-3"}) {
    const fs::path csv = dir_ / ("sweep_noise_sigma_" + v + ".csv");
    ASSERT_TRUE(fs::exists(csv)) << csv;
    const auto kv = parse_summary(slurp(dir_ / ("sweep_noise_sigma_" + v + "_summary.txt")));
    const double er = std::stod(kv.at("variant.variable.median_final_er_db"));
    EXPECT_LE(er, prev + 1e-9) << v;
    prev = er;
  }
}
