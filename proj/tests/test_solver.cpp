#include <gtest/gtest.h>

#include "gemfit/bench.hpp"
#include "gemfit/error.hpp"
#include "gemfit/solver.hpp"
#include "gemfit/synthetic.hpp"
#include "test_support.hpp"

namespace gemfit {
namespace {

using testing::max_abs;

struct Instance {
  RotationMatrix r;
  Vec3 t;
  NoisyInstance noisy;
};

Instance make_instance(Rng& rng, double sigma) {
  Instance in{random_rotation(rng), Vec3::Zero(), {}};
  in.t = random_translation(rng);
  in.noisy = noisy_instance(in.r, in.t, sigma, rng);
  return in;
}

TEST(SolverConfig, Validation) {
  SolverConfig c;
  EXPECT_NO_THROW(c.validate());
  c.tol = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.max_iter = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.mu0 = -1.0;
  EXPECT_THROW(fit(FitProblem(Mat6::Zero()), c), Error);
}

TEST(Fit, NoiseFreeExactRecovery) {
  Rng rng(61);
  for (int i = 0; i < 100; ++i) {
    Instance in = make_instance(rng, 0.0);
    FitResult res = fit(FitProblem(in.noisy.a));
    EXPECT_TRUE(res.report.converged);
    EXPECT_LT(res.report.residual, 1e-9);
    EXPECT_LT(max_abs(res.gem.r.matrix() - in.r.matrix()), 1e-6);
  }
}

TEST(Fit, ResidualBoundedByNoise) {
  Rng rng(62);
  for (double sigma : {1e-3, 1e-1, 1.0}) {
    for (int i = 0; i < 200; ++i) {
      Instance in = make_instance(rng, sigma);
      FitResult res = fit(FitProblem(in.noisy.a));
      EXPECT_LE(res.report.residual, in.noisy.omega_norm);
    }
  }
}

TEST(Fit, OutputIsFeasibleAndMonotone) {
  Rng rng(63);
  for (int i = 0; i < 200; ++i) {
    Instance in = make_instance(rng, std::pow(10.0, rng.uniform(-3, 1)));
    SolverConfig c;
    c.max_iter = 1000;
    FitResult res = fit(FitProblem(in.noisy.a), c);
    EXPECT_LT(res.gem.r.orthogonality_defect(), 1e-9);
    EXPECT_LT(res.gem.r.determinant_defect(), 1e-9);
    EXPECT_TRUE(is_monotone(res.report.g_history));
    for (double d : res.report.decreases) EXPECT_GE(d, 0.0);
  }
}

TEST(Fit, ObjectiveMatchesReportedResidual) {
  Rng rng(64);
  Instance in = make_instance(rng, 0.3);
  FitProblem p(in.noisy.a);
  FitResult res = fit(p);
  double direct = (res.gem.matrix() - in.noisy.a).squaredNorm();
  EXPECT_NEAR(res.report.objective_value, direct, 1e-10 * direct);
  EXPECT_NEAR(res.report.residual * res.report.residual, direct, 1e-10 * direct);
}

TEST(Fit, IterationCapReturnsIterateUnconverged) {
  Rng rng(65);
  Instance in = make_instance(rng, 1.0);
  SolverConfig c;
  c.max_iter = 1;
  c.init = InitStrategy::identity();
  FitResult res = fit(FitProblem(in.noisy.a), c);
  EXPECT_FALSE(res.report.converged);
  EXPECT_EQ(res.report.iterations, 1);
  EXPECT_EQ(res.report.g_history.size(), 2u);
  EXPECT_LT(res.gem.r.orthogonality_defect(), 1e-12);
}

TEST(InitialGuess, Strategies) {
  Rng rng(66);
  FitProblem p(testing::random_mat6(rng));
  EXPECT_EQ(initial_guess(p, InitStrategy::identity()).matrix(), Mat3::Identity());
  RotationMatrix r = random_rotation(rng);
  EXPECT_EQ(initial_guess(p, InitStrategy::from(r)).matrix(), r.matrix());

  Mat6 a = Mat6::Zero();
  a.topRightCorner<3, 3>() = Mat3::Identity();
  EXPECT_LT(max_abs(initial_guess(FitProblem(a), InitStrategy::procrustes()).matrix() -
                    Mat3::Identity()),
            1e-15);
}

TEST(InitialGuess, ProcrustesOptimalWhenUpperLeftVanishes) {
  Rng rng(67);
  for (int i = 0; i < 100; ++i) {
    Mat6 a = testing::random_mat6(rng);
    a.topLeftCorner<3, 3>().setZero();
    FitProblem p(a);
    RotationMatrix start = initial_guess(p, InitStrategy::procrustes());
    EXPECT_LE(objective_g(p, start), objective_g(p, RotationMatrix::identity()) + 1e-12);
    // With M = 0 the Procrustes rotation is already the minimizer.
    EXPECT_LT(riemannian_grad(p, start).norm(), 1e-10);
  }
}

TEST(InitialGuess, ProcrustesNeedsFewerIterationsOnAverage) {
  Rng rng(68);
  long procrustes = 0;
  long identity = 0;
  for (int i = 0; i < 200; ++i) {
    Instance in = make_instance(rng, 0.1);
    FitProblem p(in.noisy.a);
    SolverConfig c;
    c.max_iter = 1000;
    procrustes += fit(p, c).report.iterations;
    c.init = InitStrategy::identity();
    identity += fit(p, c).report.iterations;
  }
  EXPECT_LE(procrustes, identity);
}

TEST(Step, StationaryPointIsFixed) {
  Rng rng(69);
  Instance in = make_instance(rng, 0.0);
  FitProblem p(in.noisy.a);
  StepState s;
  s.x = in.r;
  s.mu = 0.5;
  // Exact data: the gradient at the truth is zero up to round-off.
  StepOutcome out = step(p, s, objective_g(p, s.x));
  if (out.stationary) {
    EXPECT_EQ(out.state.x.matrix(), s.x.matrix());
    EXPECT_EQ(out.state.mu, 0.5);
  } else {
    EXPECT_LT(out.step_norm, 1e-14);
  }

  StepState zero;
  StepOutcome z = step(FitProblem(Mat6::Zero()), zero, 6.0);
  EXPECT_TRUE(z.stationary);
  EXPECT_EQ(z.state.x.matrix(), Mat3::Identity());
}

TEST(Step, DescentFromIdentity) {
  Rng rng(70);
  for (int i = 0; i < 100; ++i) {
    Instance in = make_instance(rng, 0.0);
    FitProblem p(in.noisy.a);
    StepState s;
    double g0 = objective_g(p, s.x);
    StepOutcome out = step(p, s, g0);
    ASSERT_FALSE(out.stationary);
    EXPECT_LT(out.accepted_g, g0);
    EXPECT_GT(out.decrease, 0.0);
    EXPECT_LT(out.state.x.orthogonality_defect(), 1e-12);
  }
}

// Starting with a tiny step forces the doubling loop. The accepted point is
// compared with a dense grid over the same geodesic, computed through the
// series exponential.
TEST(Step, DoublingAgainstGridSearch) {
  Rng rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    Instance in = make_instance(rng, 0.5);
    FitProblem p(in.noisy.a);
    StepState s;
    s.x = random_rotation(rng);
    s.mu = 1e-4;
    double g0 = objective_g(p, s.x);
    StepOutcome out = step(p, s, g0);
    ASSERT_GE(out.doublings, 1);

    Mat3 z = out.state.z_mat;
    double best = g0;
    double hi = 8.0 * out.state.mu;
    for (int k = 1; k <= 4000; ++k) {
      double mu = hi * k / 4000.0;
      Mat3 x = testing::expm_series(-mu * z) * s.x.matrix();
      best = std::min(best, objective_g_explicit(p, RotationMatrix::unchecked(x)));
    }
    Mat3 accepted = testing::expm_series(-out.state.mu * z) * s.x.matrix();
    EXPECT_LT(max_abs(accepted - out.state.x.matrix()), 1e-12);
    EXPECT_GE(g0 - out.accepted_g, 0.5 * (g0 - best));
    // Armijo sufficient decrease at the accepted step.
    EXPECT_GE(out.decrease, 0.5 * out.state.mu * out.state.z);
  }
}

TEST(MultiStart, SingleStartMatchesFit) {
  Rng rng(72);
  Instance in = make_instance(rng, 0.1);
  FitProblem p(in.noisy.a);
  MultiStartResult ms = multi_start_fit(p, {}, 1, 5);
  FitResult single = fit(p);
  EXPECT_EQ(ms.best.gem.r.matrix(), single.gem.r.matrix());
  EXPECT_EQ(ms.best.report.iterations, single.report.iterations);
  EXPECT_EQ(ms.objective_spread, 0.0);
  EXPECT_THROW(multi_start_fit(p, {}, 0, 5), Error);
}

TEST(MultiStart, BestIsLowestAndDeterministic) {
  Rng rng(73);
  Instance in = make_instance(rng, 0.5);
  FitProblem p(in.noisy.a);
  MultiStartResult a = multi_start_fit(p, {}, 10, 99);
  MultiStartResult b = multi_start_fit(p, {}, 10, 99);
  ASSERT_EQ(a.runs.size(), 10u);
  for (const FitResult& r : a.runs) {
    EXPECT_GE(r.report.objective_value, a.best.report.objective_value);
  }
  EXPECT_EQ(a.best_index, b.best_index);
  EXPECT_EQ(a.best.gem.r.matrix(), b.best.gem.r.matrix());
  EXPECT_EQ(a.objective_spread, b.objective_spread);
}

// The Procrustes start lands in the lowest basin found by random starts.
TEST(MultiStart, ProcrustesStartReachesBestObjective) {
  Rng rng(74);
  for (int i = 0; i < 100; ++i) {
    Instance in = make_instance(rng, 1e-3);
    FitProblem p(in.noisy.a);
    MultiStartResult ms = multi_start_fit(p, {}, 10, 1000 + i);
    EXPECT_NEAR(ms.runs.front().report.objective_value, ms.best.report.objective_value, 1e-9);
  }
}

}  // namespace
}  // namespace gemfit
