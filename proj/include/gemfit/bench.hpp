#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gemfit {

enum class BenchSolver { kManifold, kDirect };

std::string to_string(BenchSolver s);
std::optional<BenchSolver> parse_bench_solver(const std::string& name);

struct BenchSpec {
  std::vector<double> noise_levels;
  std::vector<double> tolerances;
  int trials = 1000;
  std::vector<BenchSolver> solvers{BenchSolver::kManifold, BenchSolver::kDirect};
  std::uint64_t seed = 0;
  // Wall-clock columns are only measured on request; without them every
  // output byte is a function of the seed.
  bool timing = false;
  // Cap used for the manifold solver in sweeps; far above the expected
  // iteration counts so that the counts are observed, not clipped.
  int manifold_max_iter = 1000;

  void validate() const;
};

// Log-spaced 1e-3 ... 1e1 (two per decade), tolerances {1e-9, 1e-6}.
BenchSpec default_noise_spec();
// Noise {1e-1, 5e-1}, tolerances 1e-15 ... 1 (one per decade).
BenchSpec default_tolerance_spec();

struct BenchRow {
  double noise = 0.0;
  double tol = 0.0;
  BenchSolver solver = BenchSolver::kManifold;
  std::optional<double> median_time;
  double mean_iters = 0.0;
  int max_iters = 0;
  double median_residual = 0.0;
  double converged_fraction = 0.0;
  bool monotone = true;  // every manifold run had non-increasing g
};

// One row per (noise, tol, solver) cell. Trial instances depend only on
// (seed, noise index, trial), so every solver and tolerance in a noise
// column sees the same matrices.
std::vector<BenchRow> run_bench(const BenchSpec& spec);

// noise,solver,median_time,mean_iters,median_residual,tol,max_iters,converged_fraction
void write_noise_csv(std::ostream& out, const std::vector<BenchRow>& rows);
// noise,tol,solver,median_time,mean_iters,median_residual,max_iters,converged_fraction
void write_tolerance_csv(std::ostream& out, const std::vector<BenchRow>& rows);

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// True when g_history never increases by more than round-off.
bool is_monotone(const std::vector<double>& g_history);

}  // namespace gemfit
