#include "gemfit/solver.hpp"

#include <chrono>
#include <cmath>

#include "gemfit/error.hpp"
#include "gemfit/synthetic.hpp"

namespace gemfit {

namespace {

constexpr double kStationaryZ = 1e-30;

Vec3 skew_axis(const Mat3& z) { return {z(2, 1), z(0, 2), z(1, 0)}; }

}  // namespace

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw Error(ErrorCategory::kPrecondition, "solver: tol must be positive");
  if (max_iter < 1) throw Error(ErrorCategory::kPrecondition, "solver: max_iter must be >= 1");
  if (!(mu0 > 0.0)) throw Error(ErrorCategory::kPrecondition, "solver: mu0 must be positive");
  if (max_doublings < 0 || max_halvings < 0) {
    throw Error(ErrorCategory::kPrecondition, "solver: Armijo caps must be non-negative");
  }
}

RotationMatrix initial_guess(const FitProblem& problem, const InitStrategy& strategy) {
  switch (strategy.kind) {
    case InitKind::kIdentity:
      return RotationMatrix::identity();
    case InitKind::kProvided:
      return strategy.provided;
    case InitKind::kProcrustes:
      break;
  }
  return procrustes_rotation(problem.n());
}

StepOutcome step(const FitProblem& problem, const StepState& state, double g_current,
                 const SolverConfig& config) {
  StepOutcome out;
  out.state = state;
  out.accepted_g = g_current;

  const Mat3& x = state.x.matrix();
  const Mat3 w = euclidean_grad(problem, state.x) * x.transpose();
  const Mat3 z_mat = w - w.transpose();
  const double z = 0.5 * frobenius_sq(z_mat);
  out.state.z_mat = z_mat;
  out.state.z = z;
  if (!(z >= kStationaryZ)) {
    out.stationary = true;
    out.state.p = RotationMatrix::identity();
    out.state.q = RotationMatrix::identity();
    return out;
  }

  const SkewSymmetric3 direction(skew_axis(z_mat));
  double mu = state.mu;
  // Steps are carried as E = P - I so that decreases keep relative precision.
  Mat3 ep = rodrigues_exp_minus_identity(direction, mu);
  Mat3 eq = ep * ep + 2.0 * ep;
  auto decrease = [&](const Mat3& e) {
    ++out.evaluations;
    return objective_g_decrease(problem, x, e * x);
  };

  while (decrease(eq) >= mu * z) {
    if (out.doublings == config.max_doublings) {
      out.cap_hit = true;
      break;
    }
    ep = eq;
    eq = ep * ep + 2.0 * ep;
    mu *= 2.0;
    ++out.doublings;
  }

  double dec = decrease(ep);
  while (dec < 0.5 * mu * z) {
    if (out.halvings == config.max_halvings) {
      out.cap_hit = true;
      break;
    }
    mu *= 0.5;
    ep = rodrigues_exp_minus_identity(direction, mu);
    ++out.halvings;
    dec = decrease(ep);
  }
  if (dec < 0.0) {
    // Only reachable through the halving cap: the decrease is below
    // round-off, so the iterate stays put.
    ep.setZero();
    dec = 0.0;
  }

  const Mat3 delta = ep * x;
  out.state.x = RotationMatrix::unchecked(x + delta);
  out.state.mu = mu;
  out.state.p = RotationMatrix::unchecked(Mat3::Identity() + ep);
  out.state.q = RotationMatrix::unchecked(out.state.p.matrix() * out.state.p.matrix());
  out.decrease = dec;
  out.step_norm = delta.norm();
  out.accepted_g = objective_g(problem, out.state.x);
  return out;
}

FitResult fit(const FitProblem& problem, const SolverConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  StepState state;
  state.x = initial_guess(problem, config.init);
  state.mu = config.mu0;
  double g = objective_g(problem, state.x);

  SolverReport report;
  report.g_history.push_back(g);
  int since_reorthonormalize = 0;
  while (report.iterations < config.max_iter) {
    const StepOutcome out = step(problem, state, g, config);
    report.armijo_evals += out.evaluations;
    if (out.stationary) {
      report.converged = true;
      report.final_step_norm = 0.0;
      break;
    }
    if (out.cap_hit) ++report.armijo_cap_hits;
    state = out.state;
    g = out.accepted_g;
    ++report.iterations;
    report.final_step_norm = out.step_norm;
    report.decreases.push_back(out.decrease);

    if (config.reorthonormalize_every > 0 &&
        ++since_reorthonormalize == config.reorthonormalize_every) {
      state.x = nearest_rotation(state.x.matrix());
      g = objective_g(problem, state.x);
      since_reorthonormalize = 0;
    }
    report.g_history.push_back(g);
    if (out.step_norm <= config.tol) {
      report.converged = true;
      break;
    }
  }

  FitResult result;
  result.gem = recover(problem, state.x);
  report.objective_value = g;
  report.residual = (result.gem.matrix() - problem.a()).norm();
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.report = std::move(report);
  return result;
}

MultiStartResult multi_start_fit(const FitProblem& problem, const SolverConfig& config,
                                 int n_starts, std::uint64_t seed) {
  if (n_starts < 1) {
    throw Error(ErrorCategory::kPrecondition, "multi_start_fit: n_starts must be >= 1");
  }
  Rng rng(seed);
  MultiStartResult out;
  out.runs.reserve(static_cast<std::size_t>(n_starts));
  for (int i = 0; i < n_starts; ++i) {
    SolverConfig run_config = config;
    if (i > 0) run_config.init = InitStrategy::from(random_rotation(rng));
    out.runs.push_back(fit(problem, run_config));
  }

  double lo = out.runs.front().report.objective_value;
  double hi = lo;
  for (std::size_t i = 1; i < out.runs.size(); ++i) {
    const double g = out.runs[i].report.objective_value;
    if (g < out.runs[out.best_index].report.objective_value) out.best_index = i;
    lo = std::min(lo, g);
    hi = std::max(hi, g);
  }
  out.objective_spread = hi - lo;
  out.best = out.runs[out.best_index];
  return out;
}

}  // namespace gemfit
