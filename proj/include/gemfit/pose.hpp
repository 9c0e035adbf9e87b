#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gemfit/direct.hpp"
#include "gemfit/solver.hpp"
#include "gemfit/synthetic.hpp"

namespace gemfit {

inline constexpr int kDltMinPairs = 35;

struct DltResult {
  Mat6 x;                     // unit Frobenius norm, sign-normalized
  MatX normal;                // sum of a a^T over rows a = vec(l_L l_R^T)
  double smallest_eigenvalue = 0.0;
  double second_eigenvalue = 0.0;
  bool underdetermined = false;  // fewer than kDltMinPairs rows
  bool degenerate = false;       // second eigenvalue not separated from the first
  std::vector<std::string> warnings;
};

// Linear estimate minimizing sum (l_L^T X l_R)^2 subject to |X|_F = 1.
DltResult dlt_estimate(const CorrespondenceSet& corr);

// Sign making det of the (1:3, 4:6) block positive; falls back to the sign of
// its trace and then of its largest-magnitude entry when the determinant
// vanishes.
Mat6 normalize_sign(const Mat6& x);

// Scales X so that |X12|^2 + |X21|^2 = 6, the value for a true rotation pair.
Mat6 rescale_for_projection(const Mat6& x);

// Angle between rotations, accurate near zero.
double rotation_angle_between(const RotationMatrix& a, const RotationMatrix& b);
double direction_angle_between(const Vec3& a, const Vec3& b);

double mean_abs_residual(const Mat6& x, const CorrespondenceSet& corr);

struct PoseEstimate {
  GeneralizedEssentialMatrix gem;
  Mat6 unconstrained;  // rescaled DLT matrix fed to the projection
  std::optional<double> rotation_error;
  std::optional<double> translation_direction_error;
  double mean_abs_residual = 0.0;                // on gem.matrix()
  double mean_abs_residual_unconstrained = 0.0;  // on `unconstrained`
  double feasibility_violation = 0.0;
  double dlt_seconds = 0.0;
  double fit_seconds = 0.0;
  bool degenerate = false;
  std::vector<std::string> warnings;
  SolverReport report;
};

PoseEstimate relative_pose(const CorrespondenceSet& corr, const SolverConfig& config = {});

// Rows l_W^T X l_C over every world line and each ray of its bundle.
PoseEstimate absolute_pose(const std::vector<PluckerLine>& world_lines,
                           const std::vector<std::vector<PluckerLine>>& bundles,
                           const SolverConfig& config = {},
                           const std::optional<GroundTruth>& truth = std::nullopt);

CorrespondenceSet flatten(const AbsoluteScene& scene);

enum class Strategy { kFull, kWithoutConstraints, kOurPlusWc, kDlt, kOurPlusDlt };

std::string to_string(Strategy s);
std::optional<Strategy> parse_strategy(const std::string& name);

struct StrategyRow {
  Strategy strategy;
  double mean_abs_residual = 0.0;
  std::optional<double> rotation_error;
  std::optional<double> translation_direction_error;
  double wall_time = 0.0;
  double feasibility_violation = 0.0;
};

struct CompareOptions {
  SolverConfig solver;
  double full_constraint_tol = 1e-9;
  double wc_constraint_tol = 1e-1;
  // Penalty weights start this far below the mean curvature of the data
  // term and grow tenfold per round, so each tolerance stops at roughly the
  // smallest weight on the path that meets it.
  double relative_initial_weight = 1e-8;
  int outer_iters = 40;
};

// Full and Without Constraints minimize the mean squared epipolar residual
// under the quadratic penalty at their respective constraint tolerances;
// OUR+WC projects the Without Constraints matrix with the manifold solver.
std::vector<StrategyRow> compare_strategies(const CorrespondenceSet& corr,
                                            const std::vector<Strategy>& strategies,
                                            const CompareOptions& options = {});

}  // namespace gemfit
