// gemfit command-line front end. Every subcommand is deterministic under
// --seed (default: $GEMFIT_SEED, else 0). Failures print a JSON object
// {"error": <category>, "message": <text>} on stderr and exit with
//   2 usage, 3 parse, 4 dimension, 5 io, 6 precondition.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gemfit/bench.hpp"
#include "gemfit/central_essential.hpp"
#include "gemfit/direct.hpp"
#include "gemfit/error.hpp"
#include "gemfit/io.hpp"
#include "gemfit/pose.hpp"
#include "gemfit/solver.hpp"
#include "gemfit/synthetic.hpp"

using json = nlohmann::json;
using namespace gemfit;

namespace {

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kUsage:
      return 2;
    case ErrorCategory::kParse:
      return 3;
    case ErrorCategory::kDimension:
      return 4;
    case ErrorCategory::kIo:
      return 5;
    case ErrorCategory::kPrecondition:
      return 6;
  }
  return 1;
}

int report_error(ErrorCategory c, const std::string& message) {
  std::cerr << json{{"error", std::string(to_string(c))}, {"message", message}}.dump() << '\n';
  return exit_code(c);
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("GEMFIT_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      throw Error(ErrorCategory::kUsage, "GEMFIT_SEED is not an unsigned integer");
    }
  }
  return 0;
}

json to_json(const Mat3& m) {
  json a = json::array();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a.push_back(m(i, j));
  return a;
}

json to_json(const Vec3& v) { return json::array({v(0), v(1), v(2)}); }

json to_json(const Mat6& m) {
  json a = json::array();
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) a.push_back(m(i, j));
  return a;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCategory::kIo, "cannot open '" + path + "' for writing");
  out << text;
}

InitStrategy parse_init(const std::string& name) {
  if (name == "procrustes") return InitStrategy::procrustes();
  if (name == "identity") return InitStrategy::identity();
  throw Error(ErrorCategory::kUsage, "unknown --init '" + name + "'");
}

json pose_json(const PoseEstimate& p) {
  json j{{"R", to_json(p.gem.r.matrix())},
         {"t", to_json(p.gem.t)},
         {"mean_abs_residual", p.mean_abs_residual},
         {"mean_abs_residual_unconstrained", p.mean_abs_residual_unconstrained},
         {"feasibility_violation", p.feasibility_violation},
         {"iterations", p.report.iterations},
         {"converged", p.report.converged},
         {"degenerate", p.degenerate},
         {"warnings", p.warnings},
         {"dlt_seconds", p.dlt_seconds},
         {"fit_seconds", p.fit_seconds}};
  if (p.rotation_error) j["rotation_error"] = *p.rotation_error;
  if (p.translation_direction_error) j["translation_direction_error"] = *p.translation_direction_error;
  return j;
}

struct BenchOptions {
  int trials = 1000;
  std::uint64_t seed = 0;
  std::vector<double> noise;
  std::vector<double> tol;
  std::vector<std::string> solvers;
  bool timing = false;
  std::string out;
};

void add_bench_options(CLI::App* cmd, BenchOptions& o) {
  cmd->add_option("--trials", o.trials, "Trials per cell")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Seed");
  cmd->add_option("--noise", o.noise, "Noise levels");
  cmd->add_option("--tol", o.tol, "Tolerance levels");
  cmd->add_option("--solvers", o.solvers, "Solvers: manifold, direct");
  cmd->add_flag("--timing", o.timing, "Measure wall-clock medians (output no longer reproducible)");
  cmd->add_option("--out", o.out, "CSV output path (stdout if omitted)");
}

BenchSpec make_bench_spec(BenchSpec spec, const BenchOptions& o) {
  spec.trials = o.trials;
  spec.seed = o.seed;
  spec.timing = o.timing;
  if (!o.noise.empty()) spec.noise_levels = o.noise;
  if (!o.tol.empty()) spec.tolerances = o.tol;
  if (!o.solvers.empty()) {
    spec.solvers.clear();
    for (const std::string& s : o.solvers) {
      const auto parsed = parse_bench_solver(s);
      if (!parsed) throw Error(ErrorCategory::kUsage, "unknown solver '" + s + "'");
      spec.solvers.push_back(*parsed);
    }
  }
  return spec;
}

CorrespondenceSet synthetic_relative(std::uint64_t seed, int n, double line_noise) {
  Rng rng(seed);
  const RotationMatrix r = random_rotation(rng);
  const Vec3 t = random_translation(rng);
  return generate_correspondences(r, t, n, rng, line_noise);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nearest generalized essential matrix fitting"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  try {
    seed = default_seed();
  } catch (const Error& e) {
    return report_error(e.category(), e.what());
  }

  // gen
  std::string gen_kind = "matrix";
  double gen_sigma = 0.0;
  int gen_n = 100;
  int gen_lines = 8;
  int gen_rays = 6;
  double gen_line_noise = 0.0;
  std::string gen_out;
  std::string gen_truth;
  std::uint64_t gen_seed = seed;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic instance");
  gen->add_option("--kind", gen_kind, "matrix | correspondences | absolute")
      ->check(CLI::IsMember({"matrix", "correspondences", "absolute"}));
  gen->add_option("--sigma", gen_sigma, "Entrywise noise std for --kind matrix")
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--n", gen_n, "Correspondence count")->check(CLI::PositiveNumber);
  gen->add_option("--lines", gen_lines, "World lines for --kind absolute")->check(CLI::PositiveNumber);
  gen->add_option("--rays", gen_rays, "Rays per world line")->check(CLI::PositiveNumber);
  gen->add_option("--line-noise", gen_line_noise, "Ray angular noise (rad)")
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", gen_seed, "Seed");
  gen->add_option("--out", gen_out, "Output file (stdout if omitted)");
  gen->add_option("--truth", gen_truth, "Ground-truth JSON path (matrix kind)");

  // fit
  std::string fit_in;
  std::string fit_out;
  std::string fit_init = "procrustes";
  double fit_tol = 1e-9;
  int fit_max_iter = 100;
  int fit_starts = 1;
  std::uint64_t fit_seed = seed;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the nearest generalized essential matrix");
  fit_cmd->add_option("--in", fit_in, "6x6 matrix file")->required();
  fit_cmd->add_option("--out", fit_out, "Result JSON (stdout if omitted)");
  fit_cmd->add_option("--tol", fit_tol, "Stopping tolerance on |X_{k+1} - X_k|")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--init", fit_init, "procrustes | identity");
  fit_cmd->add_option("--max-iter", fit_max_iter, "Iteration cap")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--starts", fit_starts, "Multi-start count")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--seed", fit_seed, "Seed for random starts");

  // fit-direct
  std::string direct_in;
  std::string direct_out;
  PenaltyConfig direct_cfg;
  bool direct_no_snap = false;
  auto* direct_cmd = app.add_subcommand("fit-direct", "Quadratic-penalty baseline on the block constraints");
  direct_cmd->add_option("--in", direct_in, "6x6 matrix file")->required();
  direct_cmd->add_option("--out", direct_out, "Result JSON (stdout if omitted)");
  direct_cmd->add_option("--constraint-tol", direct_cfg.constraint_tol, "Constraint tolerance")
      ->check(CLI::PositiveNumber);
  direct_cmd->add_option("--outer-iters", direct_cfg.outer_iters, "Penalty rounds")
      ->check(CLI::PositiveNumber);
  direct_cmd->add_option("--initial-weight", direct_cfg.initial_weight, "Initial penalty weight");
  direct_cmd->add_option("--weight-growth", direct_cfg.weight_growth, "Penalty growth factor");
  direct_cmd->add_flag("--no-snap", direct_no_snap, "Skip the final feasibility snap");

  // project-essential
  std::string ess_in;
  std::string ess_out;
  auto* ess_cmd = app.add_subcommand("project-essential", "Nearest central essential matrix");
  ess_cmd->add_option("--in", ess_in, "3x3 matrix file")->required();
  ess_cmd->add_option("--out", ess_out, "Matrix output (stdout if omitted)");

  // bench
  BenchOptions noise_opts;
  noise_opts.seed = seed;
  auto* bench_noise = app.add_subcommand("bench-noise", "Noise-level sweep (CSV)");
  add_bench_options(bench_noise, noise_opts);
  BenchOptions tol_opts;
  tol_opts.seed = seed;
  auto* bench_tol = app.add_subcommand("bench-tolerance", "Tolerance sweep (CSV)");
  add_bench_options(bench_tol, tol_opts);

  // pose-sim
  int pose_n = 100;
  double pose_noise = 0.0;
  std::uint64_t pose_seed = seed;
  bool pose_absolute = false;
  int pose_lines = 8;
  int pose_rays = 6;
  std::string pose_in;
  std::string pose_out;
  double pose_tol = 1e-9;
  auto* pose_sim = app.add_subcommand("pose-sim", "DLT then projection on a synthetic or file scene");
  pose_sim->add_option("--n", pose_n, "Correspondences (relative)")->check(CLI::PositiveNumber);
  pose_sim->add_option("--line-noise", pose_noise, "Ray angular noise (rad)")
      ->check(CLI::NonNegativeNumber);
  pose_sim->add_option("--seed", pose_seed, "Seed");
  pose_sim->add_flag("--absolute", pose_absolute, "Absolute pose against known world lines");
  pose_sim->add_option("--lines", pose_lines, "World lines (absolute)")->check(CLI::PositiveNumber);
  pose_sim->add_option("--rays", pose_rays, "Rays per line (absolute)")->check(CLI::PositiveNumber);
  pose_sim->add_option("--in", pose_in, "Correspondence file instead of a synthetic scene");
  pose_sim->add_option("--tol", pose_tol, "Manifold solver tolerance")->check(CLI::PositiveNumber);
  pose_sim->add_option("--out", pose_out, "Result JSON (stdout if omitted)");

  // pose-compare
  int cmp_n = 100;
  double cmp_noise = 1e-3;
  std::uint64_t cmp_seed = seed;
  std::string cmp_in;
  std::string cmp_out;
  std::vector<std::string> cmp_strategies{"full", "without-constraints", "our+wc", "dlt", "our+dlt"};
  auto* pose_cmp = app.add_subcommand("pose-compare", "Strategy comparison table (CSV)");
  pose_cmp->add_option("--n", cmp_n, "Correspondences")->check(CLI::PositiveNumber);
  pose_cmp->add_option("--line-noise", cmp_noise, "Ray angular noise (rad)")
      ->check(CLI::NonNegativeNumber);
  pose_cmp->add_option("--seed", cmp_seed, "Seed");
  pose_cmp->add_option("--in", cmp_in, "Correspondence file instead of a synthetic scene");
  pose_cmp->add_option("--strategies", cmp_strategies, "Strategies to run");
  pose_cmp->add_option("--out", cmp_out, "CSV output (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(ErrorCategory::kUsage, e.what());
  }

  try {
    if (gen->parsed()) {
      Rng rng(gen_seed);
      const RotationMatrix r = random_rotation(rng);
      const Vec3 t = random_translation(rng);
      std::ostringstream text;
      if (gen_kind == "matrix") {
        const NoisyInstance inst = noisy_instance(r, t, gen_sigma, rng);
        write_matrix(text, inst.a);
        if (!gen_truth.empty()) {
          emit(gen_truth, json{{"R", to_json(r.matrix())},
                               {"t", to_json(t)},
                               {"sigma", gen_sigma},
                               {"omega_norm", inst.omega_norm},
                               {"seed", gen_seed}}
                                  .dump(2) + "\n");
        }
      } else if (gen_kind == "correspondences") {
        write_correspondences(text, generate_correspondences(r, t, gen_n, rng, gen_line_noise));
      } else {
        const AbsoluteScene scene =
            generate_absolute_scene(r, t, gen_lines, gen_rays, rng, gen_line_noise);
        write_correspondences(text, flatten(scene));
      }
      emit(gen_out, text.str());
    } else if (fit_cmd->parsed()) {
      const Mat6 a = read_matrix_file(fit_in, 6, 6);
      SolverConfig cfg;
      cfg.tol = fit_tol;
      cfg.max_iter = fit_max_iter;
      cfg.init = parse_init(fit_init);
      const FitProblem problem(a);
      FitResult result;
      double spread = 0.0;
      if (fit_starts > 1) {
        MultiStartResult ms = multi_start_fit(problem, cfg, fit_starts, fit_seed);
        result = ms.best;
        spread = ms.objective_spread;
      } else {
        result = fit(problem, cfg);
      }
      json j{{"R", to_json(result.gem.r.matrix())},
             {"t", to_json(result.gem.t)},
             {"matrix", to_json(result.gem.matrix())},
             {"residual", result.report.residual},
             {"objective", result.report.objective_value},
             {"iterations", result.report.iterations},
             {"converged", result.report.converged},
             {"final_step_norm", result.report.final_step_norm},
             {"armijo_evals", result.report.armijo_evals},
             {"wall_time", result.report.wall_time}};
      if (fit_starts > 1) j["objective_spread"] = spread;
      emit(fit_out, j.dump(2) + "\n");
    } else if (direct_cmd->parsed()) {
      const Mat6 a = read_matrix_file(direct_in, 6, 6);
      direct_cfg.snap = !direct_no_snap;
      const DirectResult r = fit_direct(a, direct_cfg);
      json j{{"matrix", to_json(r.x)},
             {"residual", r.report.residual},
             {"iterations", r.report.iterations},
             {"converged", r.report.converged},
             {"pre_snap_violation", r.pre_snap_violation},
             {"post_snap_violation", r.post_snap_violation},
             {"wall_time", r.report.wall_time}};
      if (direct_cfg.snap) {
        const GeneralizedEssentialMatrix g = snap_to_feasible(r.x);
        j["R"] = to_json(g.r.matrix());
        j["t"] = to_json(g.t);
      }
      emit(direct_out, j.dump(2) + "\n");
    } else if (ess_cmd->parsed()) {
      const Mat3 a = read_matrix_file(ess_in, 3, 3);
      std::ostringstream text;
      write_matrix(text, project_to_essential(a).e);
      emit(ess_out, text.str());
    } else if (bench_noise->parsed() || bench_tol->parsed()) {
      const bool noise = bench_noise->parsed();
      const BenchOptions& o = noise ? noise_opts : tol_opts;
      const BenchSpec spec =
          make_bench_spec(noise ? default_noise_spec() : default_tolerance_spec(), o);
      const std::vector<BenchRow> rows = run_bench(spec);
      std::ostringstream text;
      if (noise) {
        write_noise_csv(text, rows);
      } else {
        write_tolerance_csv(text, rows);
      }
      emit(o.out, text.str());
    } else if (pose_sim->parsed()) {
      SolverConfig cfg;
      cfg.tol = pose_tol;
      PoseEstimate est;
      if (!pose_in.empty()) {
        est = relative_pose(read_correspondences_file(pose_in), cfg);
      } else if (pose_absolute) {
        Rng rng(pose_seed);
        const RotationMatrix r = random_rotation(rng);
        const Vec3 t = random_translation(rng);
        const AbsoluteScene scene = generate_absolute_scene(r, t, pose_lines, pose_rays, rng, pose_noise);
        est = absolute_pose(scene.world_lines, scene.bundles, cfg, scene.truth);
      } else {
        est = relative_pose(synthetic_relative(pose_seed, pose_n, pose_noise), cfg);
      }
      emit(pose_out, pose_json(est).dump(2) + "\n");
    } else if (pose_cmp->parsed()) {
      std::vector<Strategy> strategies;
      for (const std::string& s : cmp_strategies) {
        const auto parsed = parse_strategy(s);
        if (!parsed) throw Error(ErrorCategory::kUsage, "unknown strategy '" + s + "'");
        strategies.push_back(*parsed);
      }
      const CorrespondenceSet corr = cmp_in.empty() ? synthetic_relative(cmp_seed, cmp_n, cmp_noise)
                                                    : read_correspondences_file(cmp_in);
      const std::vector<StrategyRow> rows = compare_strategies(corr, strategies);
      std::ostringstream text;
      text << "strategy,mean_abs_residual,rotation_error,translation_direction_error,wall_time,"
              "feasibility_violation\n";
      auto opt = [](const std::optional<double>& v) {
        if (!v) return std::string("NA");
        std::ostringstream s;
        s.precision(17);
        s << *v;
        return s.str();
      };
      for (const StrategyRow& row : rows) {
        text.precision(17);
        text << to_string(row.strategy) << ',' << row.mean_abs_residual << ','
             << opt(row.rotation_error) << ',' << opt(row.translation_direction_error) << ','
             << row.wall_time << ',' << row.feasibility_violation << '\n';
      }
      emit(cmp_out, text.str());
    }
  } catch (const Error& e) {
    return report_error(e.category(), e.what());
  } catch (const std::exception& e) {
    return report_error(ErrorCategory::kPrecondition, e.what());
  }
  return 0;
}
