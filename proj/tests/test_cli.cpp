#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

const fs::path kConfigs = RNEWTON_CONFIG_DIR;

struct CliResult {
  int status = -1;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / "rnewton_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

CliResult cli(const std::string& sub, const fs::path& config, const fs::path& out, const std::string& extra = "") {
  fs::create_directories(out);
  const fs::path err = out / "stderr.txt";
  const std::string cmd = "\"" RNEWTON_CLI_PATH "\" " + sub + " --config \"" + config.string() + "\" --out \"" +
                          out.string() + "\" --quiet " + extra + " 2> \"" + err.string() + "\"";
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(err)};
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.yaml";
  std::ofstream(p) << text;
  return p;
}

TEST(Cli, ExactStartConvergesWithStatusZero) {
  const fs::path out = scratch("exact");
  EXPECT_EQ(cli("solve", kConfigs / "poisson1d_exact.yaml", out).status, 0);
  for (const char* f : {"report.json", "history.csv", "solution.csv", "checkpoint.json", "run.log"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  EXPECT_NE(slurp(out / "report.json").find("\"converged\": true"), std::string::npos);
}

TEST(Cli, NonConvergenceGivesStatusTwo) {
  const fs::path dir = scratch("capped");
  const fs::path cfg = write_config(dir,
                                    "seed: 0\n"
                                    "problem: {name: poisson1d}\n"
                                    "network: {widths: [1, 5, 1]}\n"
                                    "sampling: {kind: grid, step: 0.05}\n"
                                    "solver: {stop_norm: full, stop_tol: 1.0e-12, max_iters: 3, max_step: 0.1}\n");
  EXPECT_EQ(cli("solve", cfg, dir / "out").status, 2);
  EXPECT_NE(slurp(dir / "out" / "report.json").find("\"termination\": \"MaxIters\""), std::string::npos);
}

TEST(Cli, UnderdeterminedPlanIsRejected) {
  const fs::path dir = scratch("under");
  const fs::path cfg = write_config(dir,
                                    "seed: 0\n"
                                    "problem: {name: poisson1d}\n"
                                    "network: {widths: [1, 10, 1]}\n"
                                    "sampling: {kind: grid, step: 0.1}\n");
  const CliResult r = cli("solve", cfg, dir);
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("11 equations for 31 unknowns"), std::string::npos) << r.err;
}

TEST(Cli, ConfigErrorsNameLineAndField) {
  const fs::path dir = scratch("typo");
  const CliResult typo = cli("solve",
                       write_config(dir, "seed: 0\nproblem:\n  name: poisson1d\nnetwork: {widths: [1, 2, 1]}\n"
                                         "solvr:\n  stop_tol: 1\n"),
                       dir);
  EXPECT_EQ(typo.status, 1);
  EXPECT_NE(typo.err.find("line 5: field 'solvr': unknown key"), std::string::npos) << typo.err;

  const CliResult neg = cli("solve",
                      write_config(dir, "seed: 0\nproblem: {name: poisson1d}\nnetwork: {widths: [1, 2, 1]}\n"
                                        "solver: {stop_tol: -1}\n"),
                      dir);
  EXPECT_EQ(neg.status, 1);
  EXPECT_NE(neg.err.find("stop_tol"), std::string::npos) << neg.err;

  const CliResult syntax = cli("solve", write_config(dir, "seed: 0\nproblem: [\n"), dir);
  EXPECT_EQ(syntax.status, 1);
  EXPECT_NE(syntax.err.find("line "), std::string::npos) << syntax.err;
}

TEST(Cli, MissingConfigFile) {
  const fs::path dir = scratch("missing");
  EXPECT_EQ(cli("solve", dir / "nope.yaml", dir).status, 1);
}

TEST(Cli, RerunIsByteIdentical) {
  const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
  const int sa = cli("solve", kConfigs / "poisson1d.yaml", a).status;
  const int sb = cli("solve", kConfigs / "poisson1d.yaml", b).status;
  EXPECT_EQ(sa, 0);
  EXPECT_EQ(sa, sb);
  for (const char* f : {"report.json", "solution.csv", "history.csv", "checkpoint.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Cli, SweepTableIndependentOfJobs) {
  const fs::path a = scratch("sweep_1"), b = scratch("sweep_3");
  cli("solve", kConfigs / "poisson1d_table1.yaml", a, "--jobs 1");
  cli("solve", kConfigs / "poisson1d_table1.yaml", b, "--jobs 3");
  const std::string table = slurp(a / "table.csv");
  EXPECT_EQ(table, slurp(b / "table.csv"));
  EXPECT_EQ(slurp(a / "report.json"), slurp(b / "report.json"));
  std::istringstream is(table);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "sample_points,nodes,variables,iterations,error,converged");
  std::size_t rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 27u);
}

TEST(Cli, SeedOverrideChangesTheRun) {
  const fs::path a = scratch("seed_a"), b = scratch("seed_b");
  cli("solve", kConfigs / "poisson1d.yaml", a, "--seed 3");
  cli("solve", kConfigs / "poisson1d.yaml", b, "--seed 4");
  EXPECT_NE(slurp(a / "report.json"), slurp(b / "report.json"));
}

TEST(Cli, CollocationDemoTable) {
  const fs::path out = scratch("colloc");
  EXPECT_EQ(cli("demo-collocation", kConfigs / "collocation_demo.yaml", out).status, 0);
  const std::string t = slurp(out / "table.csv");
  EXPECT_EQ(t.rfind("form,label,x1,x2,converged,iterations,w1,b1,w2,b2,residual,l2_error\n", 0), 0u);
  EXPECT_NE(t.find("reduced,CL1,"), std::string::npos);
  EXPECT_NE(t.find("reduced,CL3,0.10000000000000001,0.20000000000000001,true,25,-18.849555921538762"),
            std::string::npos);
  EXPECT_NE(t.find("full,CL3,"), std::string::npos);
}

TEST(Cli, DiagnoseAndReferenceRun) {
  const fs::path d = scratch("diagnose"), r = scratch("reference");
  EXPECT_EQ(cli("diagnose", kConfigs / "diagnose.yaml", d).status, 0);
  EXPECT_TRUE(fs::exists(d / "report.json"));
  EXPECT_EQ(cli("reference", kConfigs / "bratu_reference.yaml", r).status, 0);
  EXPECT_TRUE(fs::exists(r / "solution.csv"));
}

}  // namespace
