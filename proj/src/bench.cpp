#include "gemfit/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <numeric>
#include <ostream>
#include <thread>

#include "gemfit/direct.hpp"
#include "gemfit/error.hpp"
#include "gemfit/solver.hpp"
#include "gemfit/synthetic.hpp"

namespace gemfit {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct TrialResult {
  double time = 0.0;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  bool monotone = true;
};

TrialResult run_trial(BenchSolver solver, const Mat6& a, double tol, int manifold_max_iter) {
  TrialResult out;
  if (solver == BenchSolver::kManifold) {
    SolverConfig cfg;
    cfg.tol = tol;
    cfg.max_iter = manifold_max_iter;
    const FitResult r = fit(FitProblem(a), cfg);
    out = {r.report.wall_time, r.report.iterations, r.report.residual, r.report.converged,
           is_monotone(r.report.g_history)};
  } else {
    PenaltyConfig cfg;
    cfg.constraint_tol = tol;
    cfg.outer_iters = 12;
    const DirectResult r = fit_direct(a, cfg);
    out = {r.report.wall_time, r.report.iterations, r.report.residual, r.report.converged, true};
  }
  return out;
}

BenchRow run_cell(const BenchSpec& spec, std::size_t noise_index, std::size_t tol_index,
                  BenchSolver solver) {
  const double noise = spec.noise_levels[noise_index];
  const double tol = spec.tolerances[tol_index];
  std::vector<double> times;
  std::vector<double> residuals;
  double iter_sum = 0.0;
  int converged = 0;
  BenchRow row;
  row.noise = noise;
  row.tol = tol;
  row.solver = solver;

  for (int trial = 0; trial < spec.trials; ++trial) {
    Rng rng(derive_seed(spec.seed, {noise_index, static_cast<std::uint64_t>(trial)}));
    const RotationMatrix r = random_rotation(rng);
    const Vec3 t = random_translation(rng);
    const Mat6 a = noisy_instance(r, t, noise, rng).a;
    if (spec.timing && trial == 0) run_trial(solver, a, tol, spec.manifold_max_iter);  // warm-up
    const TrialResult res = run_trial(solver, a, tol, spec.manifold_max_iter);
    times.push_back(res.time);
    residuals.push_back(res.residual);
    iter_sum += res.iterations;
    row.max_iters = std::max(row.max_iters, res.iterations);
    converged += res.converged ? 1 : 0;
    row.monotone = row.monotone && res.monotone;
  }
  if (spec.timing) row.median_time = median(times);
  row.mean_iters = iter_sum / spec.trials;
  row.median_residual = median(residuals);
  row.converged_fraction = static_cast<double>(converged) / spec.trials;
  return row;
}

std::string time_field(const BenchRow& row) {
  return row.median_time ? fmt(*row.median_time) : "NA";
}

}  // namespace

std::string to_string(BenchSolver s) {
  return s == BenchSolver::kManifold ? "manifold" : "direct";
}

std::optional<BenchSolver> parse_bench_solver(const std::string& name) {
  if (name == "manifold") return BenchSolver::kManifold;
  if (name == "direct") return BenchSolver::kDirect;
  return std::nullopt;
}

void BenchSpec::validate() const {
  if (noise_levels.empty() || tolerances.empty() || solvers.empty()) {
    throw Error(ErrorCategory::kUsage, "bench: noise levels, tolerances and solvers are required");
  }
  for (double v : noise_levels)
    if (!(v > 0.0)) throw Error(ErrorCategory::kUsage, "bench: noise levels must be positive");
  for (double v : tolerances)
    if (!(v > 0.0)) throw Error(ErrorCategory::kUsage, "bench: tolerances must be positive");
  if (trials < 1) throw Error(ErrorCategory::kUsage, "bench: trials must be >= 1");
}

BenchSpec default_noise_spec() {
  BenchSpec spec;
  for (int k = 0; k <= 8; ++k) spec.noise_levels.push_back(std::pow(10.0, -3.0 + 0.5 * k));
  spec.tolerances = {1e-9, 1e-6};
  return spec;
}

BenchSpec default_tolerance_spec() {
  BenchSpec spec;
  spec.noise_levels = {1e-1, 5e-1};
  for (int k = -15; k <= 0; ++k) spec.tolerances.push_back(std::pow(10.0, k));
  return spec;
}

std::vector<BenchRow> run_bench(const BenchSpec& spec) {
  spec.validate();
  struct Cell {
    std::size_t noise_index, tol_index;
    BenchSolver solver;
  };
  std::vector<Cell> cells;
  for (std::size_t n = 0; n < spec.noise_levels.size(); ++n)
    for (std::size_t t = 0; t < spec.tolerances.size(); ++t)
      for (BenchSolver s : spec.solvers) cells.push_back({n, t, s});

  std::vector<BenchRow> rows(cells.size());
  // Timed runs stay sequential so cells do not compete for cores.
  const unsigned workers =
      spec.timing ? 1u : std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  if (workers == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      rows[i] = run_cell(spec, cells[i].noise_index, cells[i].tol_index, cells[i].solver);
  } else {
    std::vector<std::future<void>> jobs;
    for (unsigned w = 0; w < workers; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < cells.size(); i += workers)
          rows[i] = run_cell(spec, cells[i].noise_index, cells[i].tol_index, cells[i].solver);
      }));
    }
    for (auto& j : jobs) j.get();
  }
  return rows;
}

void write_noise_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "noise,solver,median_time,mean_iters,median_residual,tol,max_iters,converged_fraction\n";
  for (const BenchRow& r : rows) {
    out << fmt(r.noise) << ',' << to_string(r.solver) << ',' << time_field(r) << ','
        << fmt(r.mean_iters) << ',' << fmt(r.median_residual) << ',' << fmt(r.tol) << ','
        << r.max_iters << ',' << fmt(r.converged_fraction) << '\n';
  }
}

void write_tolerance_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "noise,tol,solver,median_time,mean_iters,median_residual,max_iters,converged_fraction\n";
  for (const BenchRow& r : rows) {
    out << fmt(r.noise) << ',' << fmt(r.tol) << ',' << to_string(r.solver) << ','
        << time_field(r) << ',' << fmt(r.mean_iters) << ',' << fmt(r.median_residual) << ','
        << r.max_iters << ',' << fmt(r.converged_fraction) << '\n';
  }
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCategory::kDimension, "spearman: need two equally sized samples");
  }
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
      std::size_t j = i;
      while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const std::vector<double> rx = ranks(x);
  const std::vector<double> ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return (sxx == 0.0 || syy == 0.0) ? 0.0 : sxy / std::sqrt(sxx * syy);
}

bool is_monotone(const std::vector<double>& g_history) {
  for (std::size_t i = 1; i < g_history.size(); ++i) {
    const double slack = 1e-13 * (1.0 + std::abs(g_history[i - 1]));
    if (g_history[i] > g_history[i - 1] + slack) return false;
  }
  return true;
}

}  // namespace gemfit
