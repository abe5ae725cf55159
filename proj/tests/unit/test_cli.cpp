#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "spl/instance.hpp"

#ifndef SPL_BINARY
#error "SPL_BINARY must name the spl executable"
#endif

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run_spl(const std::string& args, const std::string& env = "") {
  const std::string cmd = (env.empty() ? "" : env + " ") + std::string(SPL_BINARY) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("spl_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenerateThenSolve) {
  ASSERT_EQ(run_spl("gen --m 10 --n 5000 --seed 1 -o " + path("inst.json")).code, 0);
  const auto r = run_spl("lp " + path("inst.json"));
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("objective "), std::string::npos);
  EXPECT_NE(r.out.find("beta a0 "), std::string::npos);
  EXPECT_NE(r.out.find("beta a9 "), std::string::npos);
}

TEST_F(Cli, BenchCsvHasLpWeightAtHundred) {
  ASSERT_EQ(run_spl("gen --m 5 --n 2000 --seed 2 -o " + path("inst.json")).code, 0);
  const auto r = run_spl("bench " + path("inst.json") + " --algos greedy,pd_avg,pd_exp,dualbase,lp_weight --eps 0.01 --trials 3 --seed 7");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("algorithm,trial,value,eff_norm", 0), 0u);
  EXPECT_NE(r.out.find("\nLP_WEIGHT,0,"), std::string::npos);
  const auto row = r.out.substr(r.out.find("\nLP_WEIGHT,0,") + 1);
  const auto fields = row.substr(0, row.find('\n'));
  EXPECT_NE(fields.find(",100,"), std::string::npos) << fields;
}

TEST_F(Cli, FairOnTwoByTwo) {
  spl::save(spl::two_by_two_example(), path("two.json"));
  const auto r = run_spl("fair " + path("two.json") + " --policy equal");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("value 106\n"), std::string::npos) << r.out;
}

TEST_F(Cli, RunsEverySubcommand) {
  ASSERT_EQ(run_spl("gen --m 4 --n 800 --demand-min 20 --demand-max 60 --seed 3 -o " + path("i.json")).code, 0);
  for (const char* algo : {"greedy", "pd_avg", "pd_exp", "hybrid", "dualbase"})
    EXPECT_EQ(run_spl("run " + path("i.json") + " --algo " + algo + " --eps 0.05 --seed 1").code, 0) << algo;
  EXPECT_EQ(run_spl("diag " + path("i.json") + " --eps 0.1 --seed 1").code, 0);
  EXPECT_EQ(run_spl("lbdemo --T 2 --reps 5 --seed 1").code, 0);
  EXPECT_EQ(run_spl("gen --kind lower-bound --T 3 --draws 100 -o " + path("lb.json")).code, 0);
  EXPECT_EQ(run_spl("lp " + path("lb.json")).code, 0);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run_spl("--help").code, 0);
  EXPECT_EQ(run_spl("bench --help").code, 0);
  EXPECT_EQ(run_spl("frobnicate").code, 1);
  EXPECT_EQ(run_spl("lp --no-such-flag x").code, 1);
  EXPECT_EQ(run_spl("lp " + path("missing.json")).code, 2);
  spl::write_file(path("bad.json"), "{\"resources\": [");
  EXPECT_EQ(run_spl("lp " + path("bad.json")).code, 1);
  spl::write_file(path("neg.json"), R"({"resources":[{"id":"r","capacity":-2}],"agents":[]})");
  EXPECT_EQ(run_spl("lp " + path("neg.json")).code, 1);
  EXPECT_EQ(run_spl("run --generate --m 3 --n 100 --eps 1.5").code, 1);
  EXPECT_EQ(run_spl("bench --generate --m 3 --n 100 --trials 0").code, 1);
  spl::save(spl::two_by_two_example(), path("two.json"));
  EXPECT_EQ(run_spl("run " + path("two.json") + " --generate").code, 1);
  EXPECT_EQ(run_spl("gen --m 3 --n 10 -o /nonexistent/dir/x.json").code, 2);
}

TEST_F(Cli, HelpDocumentsFlags) {
  const auto r = run_spl("bench --help");
  for (const char* flag : {"--algos", "--eps", "--trials", "--seed", "--jobs", "--policy", "--shrink",
                           "--training-policy", "--hybrid-schedule", "--out", "--generate"})
    EXPECT_NE(r.out.find(flag), std::string::npos) << flag;
}

TEST_F(Cli, SeedFromEnvironment) {
  const auto flag = run_spl("run --generate --m 3 --n 300 --algo pd_avg --seed 5");
  const auto env = run_spl("run --generate --m 3 --n 300 --algo pd_avg", "SPL_SEED=5");
  const auto other = run_spl("run --generate --m 3 --n 300 --algo pd_avg --seed 6", "SPL_SEED=5");
  EXPECT_EQ(flag.code, 0);
  EXPECT_EQ(flag.out, env.out);
  EXPECT_NE(flag.out, other.out);
}

TEST_F(Cli, BenchOutputDirectory) {
  const auto r = run_spl("bench --generate --m 3 --n 500 --algos greedy,fair --trials 2 --seed 1", "SPL_OUT=" + path("out"));
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "bench.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "summary.json"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "runs" / "GREEDY-trial1.json"));
}
