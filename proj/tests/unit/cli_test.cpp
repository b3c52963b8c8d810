#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string output;
};

Result invoke(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "nonclip_cli_test.log";
  const std::string cmd = std::string("\"") + NONCLIP_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::ostringstream s;
  s << in.rdbuf();
  r.output = s.str();
  return r;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("nonclip_cli_" + name + ".cfg");
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(Cli, UnknownProblemIsConfigError) {
  const auto cfg = write_config("unknown", "problem.name = banana\n");
  const Result r = invoke("run " + cfg.string() + " --out " + (fs::temp_directory_path() / "nonclip_cli_x").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("config error"), std::string::npos) << r.output;
}

TEST(Cli, ParseErrorNamesLine) {
  const auto cfg = write_config("bad", "problem.dim = 3\noptimizer.gama = 0.1\n");
  const Result r = invoke("run --config " + cfg.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("line 2"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("optimizer.gama"), std::string::npos) << r.output;
}

TEST(Cli, BadArgumentsExitTwo) {
  EXPECT_EQ(invoke("frobnicate").code, 2);
  EXPECT_EQ(invoke("run /nonexistent/file.cfg").code, 2);
}

TEST(Cli, RunWritesOutputs) {
  const fs::path out = fs::temp_directory_path() / "nonclip_cli_run";
  fs::remove_all(out);
  const auto cfg = write_config("run", "problem.dim = 3\noptimizer.horizon = 5\nrun.seeds = 1, 2\n");
  const Result r = invoke("run " + cfg.string() + " --out " + out.string());
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(fs::exists(out / "quadratic_GGNC_seed1.csv"));
  EXPECT_TRUE(fs::exists(out / "quadratic_GGNC_seed2.csv"));
  EXPECT_TRUE(fs::exists(out / "summary.csv"));

  fs::remove_all(out);
  const Result single = invoke("run " + cfg.string() + " --out " + out.string() + " --seed 7");
  EXPECT_EQ(single.code, 0) << single.output;
  EXPECT_TRUE(fs::exists(out / "quadratic_GGNC_seed7.csv"));
  EXPECT_FALSE(fs::exists(out / "quadratic_GGNC_seed1.csv"));
  fs::remove_all(out);
}

TEST(Cli, RuntimeFailureExitsOne) {
  // Step sizes this long leave the constraint set on the first step.
  const auto cfg = write_config("diverge",
                                "optimizer.algorithm = S3CG_v1\noptimizer.beta = 1\noptimizer.gamma = 1e6\n"
                                "optimizer.rho = 1\noptimizer.deterministic = true\n");
  const Result r = invoke("run " + cfg.string() + " --out " + (fs::temp_directory_path() / "nonclip_cli_d").string());
  EXPECT_EQ(r.code, 1) << r.output;
  EXPECT_NE(r.output.find("iteration 1"), std::string::npos) << r.output;
}

TEST(Cli, VerifySubset) {
  const Result r = invoke("verify --only 2");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("PASS [2]"), std::string::npos) << r.output;
}
