#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Outcome {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("gemfit_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  // env is a prefix such as "GEMFIT_SEED=3"; the command runs in dir_.
  Outcome run(const std::string& args, const std::string& env = "") const {
    const fs::path err = path("stderr.txt");
    std::string cmd = "cd '" + dir_.string() + "' && " + env + (env.empty() ? "" : " ") + "'" +
                      GEMFIT_CLI_PATH + "' " + args + " 2>'" + err.string() + "'";
    Outcome r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err);
    return r;
  }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
  }

  fs::path dir_;
};

void expect_error(const Outcome& r, int code, const std::string& category) {
  EXPECT_EQ(r.exit_code, code) << r.err;
  json j = json::parse(r.err, nullptr, false);
  ASSERT_FALSE(j.is_discarded()) << r.err;
  EXPECT_EQ(j.at("error"), category);
  EXPECT_FALSE(j.at("message").get<std::string>().empty());
}

TEST_F(Cli, GenThenFit) {
  Outcome gen = run("gen --sigma 0.1 --seed 3 --out a.mat --truth truth.json");
  ASSERT_EQ(gen.exit_code, 0) << gen.err;
  json truth = json::parse(slurp(path("truth.json")));
  EXPECT_EQ(truth.at("R").size(), 9u);
  EXPECT_EQ(truth.at("seed"), 3);

  Outcome fit = run("fit --in a.mat");
  ASSERT_EQ(fit.exit_code, 0) << fit.err;
  json j = json::parse(fit.out);
  EXPECT_EQ(j.at("R").size(), 9u);
  EXPECT_EQ(j.at("t").size(), 3u);
  EXPECT_EQ(j.at("matrix").size(), 36u);
  EXPECT_TRUE(j.at("converged").get<bool>());
  EXPECT_GT(j.at("iterations").get<int>(), 0);
  EXPECT_GE(j.at("wall_time").get<double>(), 0.0);
  EXPECT_LE(j.at("residual").get<double>(), truth.at("omega_norm").get<double>());

  Outcome direct = run("fit-direct --in a.mat --out direct.json");
  ASSERT_EQ(direct.exit_code, 0) << direct.err;
  json d = json::parse(slurp(path("direct.json")));
  EXPECT_NEAR(d.at("residual").get<double>(), j.at("residual").get<double>(), 1e-4);
}

TEST_F(Cli, ProjectEssential) {
  write("e.mat", "3 3\n2 0 0\n0 1 0\n0 0 0.5\n");
  Outcome r = run("project-essential --in e.mat");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(r.out, "3 3\n1.5 0 0\n0 1.5 0\n0 0 0\n");
}

TEST_F(Cli, BenchIsReproducible) {
  const std::string args = "bench-noise --trials 3 --seed 7 --noise 0.001 0.1";
  Outcome a = run(args);
  Outcome b = run(args);
  ASSERT_EQ(a.exit_code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.substr(0, a.out.find('\n')),
            "noise,solver,median_time,mean_iters,median_residual,tol,max_iters,converged_fraction");
  Outcome tol = run("bench-tolerance --trials 2 --seed 7 --tol 1e-6 1e-9 --out tol.csv");
  ASSERT_EQ(tol.exit_code, 0) << tol.err;
  std::string csv = slurp(path("tol.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "noise,tol,solver,median_time,mean_iters,median_residual,max_iters,converged_fraction");
}

TEST_F(Cli, SeedFromEnvironment) {
  Outcome flag = run("gen --seed 11");
  Outcome env = run("gen", "GEMFIT_SEED=11");
  ASSERT_EQ(flag.exit_code, 0) << flag.err;
  EXPECT_EQ(flag.out, env.out);
  EXPECT_NE(flag.out, run("gen --seed 12").out);
  expect_error(run("gen", "GEMFIT_SEED=abc"), 2, "usage");
}

TEST_F(Cli, PoseCommands) {
  Outcome cmp = run("pose-compare --n 60 --seed 2 --line-noise 1e-3");
  ASSERT_EQ(cmp.exit_code, 0) << cmp.err;
  std::istringstream lines(cmp.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line,
            "strategy,mean_abs_residual,rotation_error,translation_direction_error,wall_time,"
            "feasibility_violation");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 5);

  Outcome sim = run("pose-sim --absolute --seed 4");
  ASSERT_EQ(sim.exit_code, 0) << sim.err;
  json j = json::parse(sim.out);
  EXPECT_LT(j.at("rotation_error").get<double>(), 1e-4);
  EXPECT_LT(j.at("feasibility_violation").get<double>(), 1e-8);

  ASSERT_EQ(run("gen --kind correspondences --n 50 --seed 5 --out c.txt").exit_code, 0);
  Outcome file = run("pose-sim --in c.txt");
  ASSERT_EQ(file.exit_code, 0) << file.err;
  EXPECT_LT(json::parse(file.out).at("rotation_error").get<double>(), 1e-4);
}

TEST_F(Cli, ErrorsMapToExitCodes) {
  expect_error(run("fit --bogus"), 2, "usage");
  expect_error(run(""), 2, "usage");
  write("short.mat", "6 6\n1 2\n");
  expect_error(run("fit --in short.mat"), 3, "parse");
  write("e.mat", "3 3\n1 0 0\n0 1 0\n0 0 1\n");
  expect_error(run("fit --in e.mat"), 4, "dimension");
  expect_error(run("fit --in missing.mat"), 5, "io");
  ASSERT_EQ(run("gen --seed 1 --out a.mat").exit_code, 0);
  expect_error(run("fit-direct --in a.mat --initial-weight -1"), 6, "precondition");
}

}  // namespace
