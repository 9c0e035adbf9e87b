#pragma once

#include <cstdint>
#include <vector>

#include "gemfit/linalg.hpp"
#include "gemfit/model.hpp"

namespace gemfit {

enum class InitKind { kProcrustes, kIdentity, kProvided };

struct InitStrategy {
  InitKind kind = InitKind::kProcrustes;
  RotationMatrix provided;

  static InitStrategy procrustes() { return {InitKind::kProcrustes, {}}; }
  static InitStrategy identity() { return {InitKind::kIdentity, {}}; }
  static InitStrategy from(const RotationMatrix& r) { return {InitKind::kProvided, r}; }
};

struct SolverConfig {
  double tol = 1e-9;  // on |X_{k+1} - X_k|_F
  int max_iter = 100;
  double mu0 = 1.0;
  InitStrategy init;
  int max_doublings = 50;
  int max_halvings = 60;
  int reorthonormalize_every = 20;

  // Throws Error(kPrecondition) on tol <= 0, max_iter < 1, mu0 <= 0.
  void validate() const;
};

// Iterate of the geodesic descent. `z_mat` is the skew tangent direction
// grad(X) X^T, `z` = |z_mat|^2 / 2, `p` the accepted step exp(-mu Z) and
// `q` = p^2 the doubling probe.
struct StepState {
  RotationMatrix x;
  double mu = 1.0;
  Mat3 z_mat = Mat3::Zero();
  double z = 0.0;
  RotationMatrix p;
  RotationMatrix q;
};

struct StepOutcome {
  StepState state;
  double accepted_g = 0.0;
  double decrease = 0.0;   // g(X_k) - g(X_{k+1}) evaluated without cancellation
  double step_norm = 0.0;  // |X_{k+1} - X_k|_F
  bool stationary = false;
  bool cap_hit = false;
  int doublings = 0;
  int halvings = 0;
  int evaluations = 0;
};

struct SolverReport {
  int iterations = 0;
  double final_step_norm = 0.0;
  double objective_value = 0.0;  // g at exit, including beta
  double residual = 0.0;         // |X* - A|_F
  bool converged = false;
  double wall_time = 0.0;  // seconds
  int armijo_evals = 0;
  int armijo_cap_hits = 0;
  std::vector<double> g_history;     // g(X_0), g(X_1), ...
  std::vector<double> decreases;     // per accepted step
};

struct FitResult {
  GeneralizedEssentialMatrix gem;
  SolverReport report;
};

RotationMatrix initial_guess(const FitProblem& problem, const InitStrategy& strategy);

// One iteration of the Armijo-controlled geodesic step. The doubling probe
// tests q = p^2, the halving loop tests p; mu carries over between calls.
StepOutcome step(const FitProblem& problem, const StepState& state, double g_current,
                 const SolverConfig& config = {});

FitResult fit(const FitProblem& problem, const SolverConfig& config = {});

struct MultiStartResult {
  FitResult best;
  std::size_t best_index = 0;
  double objective_spread = 0.0;  // max - min of g over starts
  std::vector<FitResult> runs;
};

// Start 0 uses config.init; the remaining starts draw random rotations from
// a generator seeded with `seed`.
MultiStartResult multi_start_fit(const FitProblem& problem, const SolverConfig& config,
                                 int n_starts, std::uint64_t seed);

}  // namespace gemfit
