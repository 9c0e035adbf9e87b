#include <gtest/gtest.h>

#include "gemfit/direct.hpp"
#include "gemfit/error.hpp"
#include "gemfit/solver.hpp"
#include "gemfit/synthetic.hpp"
#include "test_support.hpp"

namespace gemfit {
namespace {

using testing::max_abs;

// Every constraint written out entry by entry, in the documented order.
std::vector<double> constraints_oracle(const Mat6& x) {
  auto x12 = [&](int i, int j) { return x(i, 3 + j); };
  auto x11 = [&](int i, int j) { return x(i, j); };
  auto orth = [&](int a, int b) {
    double s = 0.0;
    for (int k = 0; k < 3; ++k) s += x12(k, a) * x12(k, b);
    return s - (a == b ? 1.0 : 0.0);
  };
  std::vector<double> c;
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) c.push_back(orth(a, b));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) c.push_back(x(3 + i, j) - x12(i, j));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) c.push_back(x(3 + i, 3 + j));
  for (int a = 0; a < 3; ++a) {
    for (int b = a; b < 3; ++b) {
      double s = 0.0;
      for (int m = 0; m < 3; ++m) s += x11(a, m) * x12(b, m) + x12(a, m) * x11(b, m);
      c.push_back(s);
    }
  }
  for (int a = 1; a < 3; ++a)
    for (int b = 0; b < a; ++b) c.push_back(orth(a, b));
  return c;
}

TEST(Constraints, FeasibleAndZeroMatrix) {
  Rng rng(81);
  for (int i = 0; i < 100; ++i) {
    EXPECT_LT(max_violation(assemble(random_rotation(rng), 3.0 * random_translation(rng))), 1e-12);
  }
  ConstraintVector c = constraint_residuals(Mat6::Zero());
  for (int k = 0; k < kConstraintCount; ++k) {
    double expected = (k == 0 || k == 3 || k == 5) ? -1.0 : 0.0;
    EXPECT_EQ(c(k), expected) << "slot " << k;
  }
}

TEST(Constraints, MatchEntrywiseOracle) {
  Rng rng(82);
  for (int trial = 0; trial < 200; ++trial) {
    Mat6 x = testing::random_mat6(rng);
    ConstraintVector c = constraint_residuals(x);
    std::vector<double> expected = constraints_oracle(x);
    ASSERT_EQ(expected.size(), static_cast<std::size_t>(kConstraintCount));
    for (int k = 0; k < kConstraintCount; ++k) EXPECT_NEAR(c(k), expected[k], 1e-13);
  }
}

TEST(Constraints, JacobianFiniteDifferences) {
  Rng rng(83);
  for (int trial = 0; trial < 50; ++trial) {
    Mat6 x = testing::random_mat6(rng);
    ConstraintJacobian jac = constraint_jacobian(x);
    const double h = 1e-6;
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        Mat6 xp = x, xm = x;
        xp(i, j) += h;
        xm(i, j) -= h;
        ConstraintVector fd = (constraint_residuals(xp) - constraint_residuals(xm)) / (2.0 * h);
        EXPECT_LT((fd - jac.col(6 * i + j)).cwiseAbs().maxCoeff(), 1e-8);
      }
    }
  }
}

TEST(PenaltyConfig, Validation) {
  PenaltyConfig c;
  EXPECT_NO_THROW(c.validate());
  c.weight_growth = 1.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.initial_weight = 0.0;
  EXPECT_THROW(fit_direct(Mat6::Zero(), c), Error);
  QuadraticData bad{MatX::Identity(4, 4), VecX::Zero(4)};
  try {
    penalty_minimize(bad, Mat6::Zero(), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kDimension);
  }
}

TEST(FitDirect, FeasibleInputIsRecovered) {
  Rng rng(84);
  for (int i = 0; i < 20; ++i) {
    Mat6 a = assemble(random_rotation(rng), random_translation(rng));
    DirectResult res = fit_direct(a);
    EXPECT_LT(max_abs(res.x - a), 1e-6);
    EXPECT_TRUE(res.report.converged);
  }
}

TEST(FitDirect, ParityWithManifoldSolver) {
  Rng rng(85);
  for (int i = 0; i < 30; ++i) {
    NoisyInstance in = noisy_instance(random_rotation(rng), random_translation(rng), 1e-2, rng);
    DirectResult direct = fit_direct(in.a);
    FitResult manifold = fit(FitProblem(in.a));
    EXPECT_TRUE(direct.report.converged);
    EXPECT_LT(direct.post_snap_violation, 1e-12);
    EXPECT_NEAR(direct.report.objective_value, manifold.report.objective_value, 1e-4);
  }
}

TEST(FitDirect, PenaltyHistoryIsMonotonePerRound) {
  Rng rng(86);
  NoisyInstance in = noisy_instance(random_rotation(rng), random_translation(rng), 0.3, rng);
  DirectResult res = fit_direct(in.a);
  ASSERT_FALSE(res.inner_objective.empty());
  for (const auto& round : res.inner_objective) {
    for (std::size_t k = 1; k < round.size(); ++k) EXPECT_LE(round[k], round[k - 1]);
  }
  EXPECT_LE(res.pre_snap_violation, PenaltyConfig{}.constraint_tol);
}

TEST(FitDirect, ViolationShrinksAsWeightGrows) {
  Rng rng(88);
  PenaltyConfig cfg;
  cfg.initial_weight = 1e-3;
  cfg.constraint_tol = 1e-14;
  cfg.outer_iters = 12;
  for (int i = 0; i < 20; ++i) {
    NoisyInstance in = noisy_instance(random_rotation(rng), random_translation(rng), 0.5, rng);
    DirectResult res = fit_direct(in.a, cfg);
    ASSERT_GT(res.outer_violation.size(), 3u);
    for (std::size_t k = 1; k < res.outer_violation.size(); ++k) {
      EXPECT_LE(res.outer_violation[k], res.outer_violation[k - 1] + 1e-12);
    }
  }
}

// A loose penalty run followed by the manifold projection lands next to the
// tight penalty solution.
TEST(FitDirect, LooseThenProjectMatchesTight) {
  Rng rng(87);
  for (int i = 0; i < 20; ++i) {
    NoisyInstance in = noisy_instance(random_rotation(rng), random_translation(rng), 1e-2, rng);
    PenaltyConfig loose;
    loose.constraint_tol = 1e-1;
    loose.snap = false;
    DirectResult rough = fit_direct(in.a, loose);
    FitResult projected = fit(FitProblem(rough.x));
    double projected_residual = (projected.gem.matrix() - in.a).norm();
    DirectResult tight = fit_direct(in.a);
    EXPECT_NEAR(projected_residual, tight.report.residual, 1e-4);
  }
}

TEST(SnapToFeasible, IdentityOnFeasibleMatrices) {
  Rng rng(88);
  RotationMatrix r = random_rotation(rng);
  Vec3 t = random_translation(rng);
  GeneralizedEssentialMatrix g = snap_to_feasible(assemble(r, t));
  EXPECT_LT(max_abs(g.r.matrix() - r.matrix()), 1e-14);
  EXPECT_LT((g.t - t).norm(), 1e-14);
}

}  // namespace
}  // namespace gemfit
