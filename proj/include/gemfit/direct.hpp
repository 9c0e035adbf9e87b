#pragma once

#include <vector>

#include "gemfit/linalg.hpp"
#include "gemfit/solver.hpp"

namespace gemfit {

inline constexpr int kConstraintCount = 33;
using ConstraintVector = Eigen::Matrix<double, kConstraintCount, 1>;
using ConstraintJacobian = Eigen::Matrix<double, kConstraintCount, 36>;

// Residuals of the stacked block constraints on a 6x6 matrix, in this order:
//   [0, 6)   X12^T X12 - I, upper triangle (00 01 02 11 12 22)
//   [6, 15)  X21 - X12, row-major
//   [15, 24) X22, row-major
//   [24, 30) X11 X12^T + X12 X11^T, upper triangle (00 01 02 11 12 22)
//   [30, 33) X12^T X12 - I, lower triangle (10 20 21)
ConstraintVector constraint_residuals(const Mat6& x);

// d residual / d vec(X), vec taken row-major (index 6 * row + col).
ConstraintJacobian constraint_jacobian(const Mat6& x);

double max_violation(const Mat6& x);

struct PenaltyConfig {
  double initial_weight = 10.0;
  double weight_growth = 10.0;
  int outer_iters = 8;
  int inner_max_iter = 100;
  double inner_tol = 1e-12;
  double armijo_c = 1e-4;
  double constraint_tol = 1e-6;
  bool snap = true;

  void validate() const;
};

// Data term (x - target)^T weight (x - target) over the 36 entries of vec(X).
struct QuadraticData {
  MatX weight;
  VecX target;

  static QuadraticData frobenius(const Mat6& a);
};

struct DirectResult {
  Mat6 x;
  SolverReport report;
  double pre_snap_violation = 0.0;
  double post_snap_violation = 0.0;
  std::vector<double> outer_violation;
  std::vector<std::vector<double>> inner_objective;  // per outer round
};

// Quadratic-penalty minimization of data + w * |c(X)|^2 with Gauss-Newton
// inner steps and backtracking, w grown geometrically until the violation
// is below config.constraint_tol or outer_iters is spent.
DirectResult penalty_minimize(const QuadraticData& data, const Mat6& start,
                              const PenaltyConfig& config);

// Nearest-matrix problem |X - A|^2 subject to the 33 block constraints.
DirectResult fit_direct(const Mat6& a, const PenaltyConfig& config = {});

// Exact feasibility from an approximately feasible X: R from the X12 block,
// t from the skew part of X11 R^T.
GeneralizedEssentialMatrix snap_to_feasible(const Mat6& x);

}  // namespace gemfit
