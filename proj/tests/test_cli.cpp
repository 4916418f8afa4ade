#include "fbscope/acceptance.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

using namespace fbscope;
using namespace fbscope::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("fbscope_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

Context context(const std::string& command, const fs::path& out,
                std::initializer_list<std::pair<const char*, const char*>> kv) {
  Context c;
  c.command = command;
  c.out = out;
  for (const auto& [k, v] : kv) c.cfg.set(k, v);
  return c;
}

int run_binary(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(FBSCOPE_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, FileOverridesAndTypes) {
  const auto dir = scratch("config");
  {
    std::ofstream os(dir / "run.ini");
    os << "[field]\nanalytic = wedge:q=0.5\ncells = 64\n[functionals]\ncenters = 0,0; 0.1,0\nr_min = 0.1\n";
  }
  auto cfg = RunConfig::from_file((dir / "run.ini").string());
  EXPECT_EQ(cfg.str("field.analytic"), "wedge:q=0.5");
  EXPECT_EQ(cfg.integer("field.cells", 0), 64);
  EXPECT_EQ(cfg.points<2>("functionals.centers").size(), 2u);
  cfg.apply_override("field.cells=128");
  EXPECT_EQ(cfg.integer("field.cells", 0), 128);
  EXPECT_EQ(cfg.num("functionals.r_max", 0.25), 0.25);
  EXPECT_THROW(cfg.apply_override("field.nope=1"), ConfigError);
  EXPECT_THROW(cfg.apply_override("novalue"), ConfigError);
  cfg.set("functionals.r_min", "abc");
  EXPECT_THROW(cfg.num("functionals.r_min", 0.0), ConfigError);
  EXPECT_THROW(cfg.points<3>("functionals.centers"), ConfigError);
  EXPECT_THROW(RunConfig::from_file((dir / "missing.ini").string()), ConfigError);
}

TEST(Config, HashIgnoresOutputDirectory) {
  RunConfig a, b;
  a.set("field.analytic", "wedge:q=0.5");
  b.set("field.analytic", "wedge:q=0.5");
  b.set("run.out", "elsewhere");
  EXPECT_EQ(a.hash("functionals", 1), b.hash("functionals", 1));
  EXPECT_NE(a.hash("functionals", 1), a.hash("functionals", 2));
  EXPECT_NE(a.hash("functionals", 1), a.hash("classify", 1));
  b.set("field.cells", "64");
  EXPECT_NE(a.hash("functionals", 1), b.hash("functionals", 1));
  EXPECT_EQ(a.hash("x", 0).size(), 16u);
}

TEST(Commands, FunctionalsArtifacts) {
  const auto out = scratch("functionals");
  const auto ctx = context("functionals", out,
                           {{"field.analytic", "wedge:q=0.5"}, {"field.cells", "64"}, {"functionals.centers", "0,0; 0.9,0"}});
  EXPECT_EQ(cmd_functionals(ctx), kExitOk);
  const auto csv = slurp(out / "functionals.csv");
  EXPECT_EQ(csv.rfind("# fbscope " + std::string(kVersion) + " config " + ctx.hash(), 0), 0u);
  EXPECT_NE(csv.find(",ok\n"), std::string::npos);
  EXPECT_NE(csv.find(",out_of_domain\n"), std::string::npos);
  const auto j = nlohmann::json::parse(slurp(out / "functionals.json"));
  EXPECT_EQ(j["meta"]["config_hash"], ctx.hash());
  EXPECT_NEAR(j["centers"][0]["limit"]["N0"].get<double>(), 1.0, 1e-2);
  EXPECT_EQ(j["centers"][1]["status"], "out_of_domain");
}

TEST(Commands, SourceSelection) {
  const auto out = scratch("sources");
  EXPECT_THROW(cmd_functionals(context("functionals", out, {})), ConfigError);
  EXPECT_THROW(cmd_functionals(context("functionals", out, {{"field.analytic", "wedge:q=0.5"}, {"solver.data", "wedge:q=1"}})),
               ConfigError);
  EXPECT_THROW(cmd_functionals(context("functionals", out, {{"field.analytic", "nonsense"}})), ConfigError);
  EXPECT_THROW(cmd_functionals(context("functionals", out, {{"field.file", "/nonexistent.fbsf"}})), ConfigError);
  EXPECT_THROW(cmd_classify(context("classify", out, {{"field.analytic", "wedge:q=0.5"}, {"classify.r_min_cells", "2"}})),
               ConfigError);
}

TEST(Commands, SolveThenReadBack) {
  const auto out = scratch("solve");
  const auto ctx = context("solve", out, {{"solver.data", "absharm:v=y"}, {"field.cells", "32"}, {"solver.ladder", "0.2,0.1"}});
  ASSERT_EQ(cmd_solve(ctx), kExitOk);
  const auto j = nlohmann::json::parse(slurp(out / "rung_1.json"));
  EXPECT_TRUE(j["converged"].get<bool>());
  EXPECT_TRUE(j.contains("cauchy_sup"));
  const auto f = read_fbsf<2>((out / "rung_1.fbsf").string());
  EXPECT_EQ(f.spec().cells[0], 32);
  // The stored field feeds the other commands.
  const auto c2 = context("functionals", scratch("solve_fn"), {{"field.file", (out / "rung_1.fbsf").c_str()}});
  EXPECT_EQ(cmd_functionals(c2), kExitOk);
}

TEST(Commands, SolveFailureWritesDiagnostics) {
  const auto out = scratch("solve_fail");
  const auto ctx = context("solve", out, {{"solver.data", "absharm:v=y"}, {"field.cells", "32"}, {"solver.max_iter", "1"},
                                          {"solver.tol", "1e-300"}});
  std::ostringstream log;
  auto c = ctx;
  c.log = &log;
  EXPECT_EQ(cmd_solve(c), kExitSolver);
  EXPECT_TRUE(fs::exists(out / "diagnostics.txt"));
  EXPECT_THROW(cmd_functionals(context("functionals", out, {{"solver.data", "absharm:v=y"}, {"field.cells", "32"},
                                                            {"solver.max_iter", "1"}, {"solver.tol", "1e-300"}})),
               SolverFailure);
}

TEST(Commands, ClassifyLabelsOnly) {
  const auto out = scratch("classify");
  auto ctx = context("classify", out, {{"field.analytic", "halfplane:a=1"}, {"field.cells", "64"}});
  ctx.labels_only = true;
  EXPECT_EQ(cmd_classify(ctx), kExitOk);
  const auto csv = slurp(out / "boundary.csv");
  EXPECT_NE(csv.find("\nx,y,label\n"), std::string::npos);
  EXPECT_NE(csv.find(",regular\n"), std::string::npos);
  const auto j = nlohmann::json::parse(slurp(out / "classify.json"));
  EXPECT_GT(j["summary"]["counts"]["regular"].get<int>(), 0);
}

TEST(Commands, CoverOracles) {
  const auto out = scratch("cover");
  EXPECT_EQ(cmd_cover(context("cover", out, {{"field.analytic", "wedge:q=0.5"}, {"field.cells", "128"},
                                             {"cover.candidates", "boundary"}, {"cover.oracle", "analytic"}})),
            kExitOk);
  auto j = nlohmann::json::parse(slurp(out / "covering.json"));
  EXPECT_EQ(j["nodes"].size(), 1u);
  EXPECT_EQ(j["nodes"][0]["status"], "terminal");
  EXPECT_TRUE(j["sound"].get<bool>());
  EXPECT_EQ(cmd_cover(context("cover", out, {{"cover.oracle", "synthetic"}, {"cover.synthetic", "staircase"},
                                             {"cover.delta1", "0.125"}, {"cover.eps", "0.125"}})),
            kExitOk);
  j = nlohmann::json::parse(slurp(out / "covering.json"));
  EXPECT_TRUE(j["budget"]["ok"].get<bool>());
  EXPECT_EQ(j["budget"]["bound"], 3);
  EXPECT_NE(slurp(out / "covering.dot").find("digraph covering"), std::string::npos);
  EXPECT_THROW(cmd_cover(context("cover", out, {{"cover.oracle", "analytic"}, {"field.analytic", "halfplane:a=1"}})),
               ConfigError);
  EXPECT_THROW(cmd_cover(context("cover", out, {{"cover.oracle", "synthetic"}, {"cover.delta2", "0.5"}})), ConfigError);
}

TEST(Verify, SubsetAndPerturbedTolerance) {
  const auto out = scratch("verify");
  auto ctx = context("verify", out, {{"verify.criteria", "1,7"}});
  std::ostringstream log;
  ctx.log = &log;
  EXPECT_EQ(acceptance::cmd_verify(ctx), kExitOk);
  auto j = nlohmann::json::parse(slurp(out / "verify.json"));
  EXPECT_TRUE(j["all_pass"].get<bool>());
  EXPECT_EQ(j["criteria"].size(), 2u);
  ctx.cfg.set("verify.criteria", "1,4");
  ctx.cfg.set("verify.tol_scale", "1e-3");
  EXPECT_EQ(acceptance::cmd_verify(ctx), kExitAcceptance);
  j = nlohmann::json::parse(slurp(out / "verify.json"));
  EXPECT_EQ(j["failed"], nlohmann::json::array({4}));
  EXPECT_NE(log.str().find("4"), std::string::npos);
  ctx.cfg.set("verify.criteria", "13");
  EXPECT_THROW(acceptance::cmd_verify(ctx), ConfigError);
}

TEST(Binary, ExitCodes) {
  const auto dir = scratch("binary");
  const auto log = dir / "log.txt";
  EXPECT_EQ(run_binary("verify --list", log), 0);
  EXPECT_NE(slurp(log).find("12 determinism"), std::string::npos);
  EXPECT_EQ(run_binary("functionals --set field.analytic=wedge:q=0.5 --set field.cells=32 --out " + dir.string(), log), 0);
  EXPECT_TRUE(fs::exists(dir / "functionals.csv"));
  EXPECT_EQ(run_binary("functionals --set field.bogus=1", log), 3);
  EXPECT_EQ(run_binary("functionals --config " + (dir / "none.ini").string(), log), 3);
  EXPECT_EQ(run_binary("solve --set solver.data=absharm:v=y --set field.cells=32 --set solver.max_iter=1 "
                       "--set solver.tol=1e-300 --out " + (dir / "s").string(), log),
            2);
  EXPECT_EQ(run_binary("verify --set verify.criteria=1 --set verify.tol_scale=1e-20 --out " + dir.string(), log), 1);
  EXPECT_EQ(run_binary("verify --set verify.criteria=1 --out " + dir.string(), log), 0);
}

TEST(Binary, SeedAndConfigFile) {
  const auto dir = scratch("binary_cfg");
  {
    std::ofstream os(dir / "run.ini");
    os << "[field]\nanalytic = wedge:q=0.5\ncells = 32\n[run]\nseed = 7\nout = " << (dir / "a").string() << "\n";
  }
  const auto log = dir / "log.txt";
  ASSERT_EQ(run_binary("functionals --config " + (dir / "run.ini").string(), log), 0);
  const auto j = nlohmann::json::parse(slurp(dir / "a" / "functionals.json"));
  EXPECT_EQ(j["meta"]["seed"], 7);
  ASSERT_EQ(run_binary("functionals --config " + (dir / "run.ini").string() + " --seed 9 --out " + (dir / "b").string(), log),
            0);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "b" / "functionals.json"))["meta"]["seed"], 9);
}
