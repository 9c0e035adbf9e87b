#include "gemfit/pose.hpp"

#include <chrono>
#include <cmath>

#include "gemfit/error.hpp"

namespace gemfit {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Mat6 reshape(const VecX& v) {
  Mat6 x;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) x(i, j) = v(6 * i + j);
  return x;
}

void fill_errors(const GeneralizedEssentialMatrix& gem, const std::optional<GroundTruth>& truth,
                 std::optional<double>& rotation_error, std::optional<double>& translation_error) {
  if (!truth) return;
  rotation_error = rotation_angle_between(gem.r, truth->r);
  translation_error = direction_angle_between(gem.t, truth->t);
}

}  // namespace

Mat6 normalize_sign(const Mat6& x) {
  const Mat3 block = x.topRightCorner<3, 3>();
  const double scale = block.norm();
  double sign = 0.0;
  const double det = block.determinant();
  if (std::abs(det) > 1e-12 * scale * scale * scale) {
    sign = det > 0.0 ? 1.0 : -1.0;
  } else if (std::abs(block.trace()) > 1e-12 * scale) {
    sign = block.trace() > 0.0 ? 1.0 : -1.0;
  } else {
    Eigen::Index i = 0, j = 0;
    block.cwiseAbs().maxCoeff(&i, &j);
    sign = block(i, j) >= 0.0 ? 1.0 : -1.0;
  }
  return sign * x;
}

Mat6 rescale_for_projection(const Mat6& x) {
  const double rot = frobenius_sq(x.topRightCorner<3, 3>()) + frobenius_sq(x.bottomLeftCorner<3, 3>());
  if (!(rot > 0.0)) {
    throw Error(ErrorCategory::kPrecondition, "rescale: rotation blocks are zero");
  }
  return std::sqrt(6.0 / rot) * x;
}

DltResult dlt_estimate(const CorrespondenceSet& corr) {
  if (corr.pairs.empty()) {
    throw Error(ErrorCategory::kPrecondition, "dlt: no correspondences");
  }
  DltResult out;
  out.normal = MatX::Zero(36, 36);
  Eigen::Matrix<double, 36, 1> row;
  for (const Correspondence& c : corr.pairs) {
    const Vec6 l = c.left.vector();
    const Vec6 r = c.right.vector();
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) row(6 * i + j) = l(i) * r(j);
    out.normal.selfadjointView<Eigen::Lower>().rankUpdate(row);
  }
  out.normal = out.normal.selfadjointView<Eigen::Lower>();

  const SymmetricEigen eig = symmetric_eigen(out.normal);
  out.smallest_eigenvalue = eig.eigenvalues(0);
  out.second_eigenvalue = eig.eigenvalues(1);
  out.x = normalize_sign(reshape(eig.eigenvectors.col(0)));

  if (static_cast<int>(corr.size()) < kDltMinPairs) {
    out.underdetermined = true;
    out.warnings.push_back("rank deficiency: " + std::to_string(corr.size()) +
                           " correspondences, at least " + std::to_string(kDltMinPairs) +
                           " needed");
  }
  const double largest = eig.eigenvalues(35);
  const double l1 = std::max(0.0, out.smallest_eigenvalue);
  const double l2 = std::max(0.0, out.second_eigenvalue);
  if (l2 < 10.0 * l1 || l2 <= 1e-12 * largest) {
    out.degenerate = true;
    out.warnings.push_back("degenerate configuration: spectral gap ratio below 10");
  }
  return out;
}

double rotation_angle_between(const RotationMatrix& a, const RotationMatrix& b) {
  // |A - B|_F = 2 sqrt(2) sin(theta / 2)
  const double chord = (a.matrix() - b.matrix()).norm() / (2.0 * std::sqrt(2.0));
  return 2.0 * std::asin(std::min(1.0, chord));
}

double direction_angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

double mean_abs_residual(const Mat6& x, const CorrespondenceSet& corr) {
  double sum = 0.0;
  for (const Correspondence& c : corr.pairs) sum += std::abs(epipolar_residual(x, c.left, c.right));
  return corr.pairs.empty() ? 0.0 : sum / static_cast<double>(corr.pairs.size());
}

PoseEstimate relative_pose(const CorrespondenceSet& corr, const SolverConfig& config) {
  PoseEstimate out;
  auto start = Clock::now();
  const DltResult dlt = dlt_estimate(corr);
  out.unconstrained = rescale_for_projection(dlt.x);
  out.dlt_seconds = seconds_since(start);
  out.degenerate = dlt.degenerate || dlt.underdetermined;
  out.warnings = dlt.warnings;

  start = Clock::now();
  FitResult result = fit(FitProblem(out.unconstrained), config);
  out.fit_seconds = seconds_since(start);

  out.gem = result.gem;
  out.report = std::move(result.report);
  const Mat6 x = out.gem.matrix();
  out.mean_abs_residual = mean_abs_residual(x, corr);
  out.mean_abs_residual_unconstrained = mean_abs_residual(out.unconstrained, corr);
  out.feasibility_violation = max_violation(x);
  fill_errors(out.gem, corr.truth, out.rotation_error, out.translation_direction_error);
  return out;
}

CorrespondenceSet flatten(const AbsoluteScene& scene) {
  if (scene.world_lines.size() != scene.bundles.size()) {
    throw Error(ErrorCategory::kDimension, "absolute pose: one ray bundle per world line required");
  }
  CorrespondenceSet corr;
  corr.truth = scene.truth;
  for (std::size_t i = 0; i < scene.world_lines.size(); ++i) {
    for (const PluckerLine& ray : scene.bundles[i]) corr.pairs.push_back({scene.world_lines[i], ray});
  }
  return corr;
}

PoseEstimate absolute_pose(const std::vector<PluckerLine>& world_lines,
                           const std::vector<std::vector<PluckerLine>>& bundles,
                           const SolverConfig& config, const std::optional<GroundTruth>& truth) {
  AbsoluteScene scene{world_lines, bundles, {}};
  CorrespondenceSet corr = flatten(scene);
  corr.truth = truth;
  PoseEstimate out = relative_pose(corr, config);
  // Rays meeting one world line span only a 5-dimensional linear complex,
  // so each line adds at most five independent rows to the system.
  if (world_lines.size() < 2) {
    out.degenerate = true;
    out.warnings.push_back("degenerate configuration: a single world line");
  } else if (5 * world_lines.size() < static_cast<std::size_t>(kDltMinPairs)) {
    out.degenerate = true;
    out.warnings.push_back("rank deficiency: " + std::to_string(world_lines.size()) +
                           " world lines give at most " + std::to_string(5 * world_lines.size()) +
                           " independent rows");
  }
  return out;
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kFull:
      return "full";
    case Strategy::kWithoutConstraints:
      return "without-constraints";
    case Strategy::kOurPlusWc:
      return "our+wc";
    case Strategy::kDlt:
      return "dlt";
    case Strategy::kOurPlusDlt:
      return "our+dlt";
  }
  return "unknown";
}

std::optional<Strategy> parse_strategy(const std::string& name) {
  for (Strategy s : {Strategy::kFull, Strategy::kWithoutConstraints, Strategy::kOurPlusWc,
                     Strategy::kDlt, Strategy::kOurPlusDlt}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::vector<StrategyRow> compare_strategies(const CorrespondenceSet& corr,
                                            const std::vector<Strategy>& strategies,
                                            const CompareOptions& options) {
  auto dlt_start = Clock::now();
  const DltResult dlt = dlt_estimate(corr);
  const Mat6 start = rescale_for_projection(dlt.x);
  const double dlt_time = seconds_since(dlt_start);

  QuadraticData data{dlt.normal / static_cast<double>(corr.size()), VecX::Zero(36)};
  PenaltyConfig base;
  base.initial_weight = options.relative_initial_weight * data.weight.trace() / 36.0;
  base.outer_iters = options.outer_iters;

  // Without Constraints is shared by two strategies; computed at most once.
  std::optional<DirectResult> wc;
  double wc_time = 0.0;
  auto without_constraints = [&]() -> const DirectResult& {
    if (!wc) {
      const auto t0 = Clock::now();
      PenaltyConfig cfg = base;
      cfg.constraint_tol = options.wc_constraint_tol;
      cfg.snap = false;
      wc = penalty_minimize(data, start, cfg);
      wc_time = dlt_time + seconds_since(t0);
    }
    return *wc;
  };

  std::vector<StrategyRow> rows;
  for (Strategy s : strategies) {
    StrategyRow row;
    row.strategy = s;
    Mat6 x;
    GeneralizedEssentialMatrix pose_source;
    switch (s) {
      case Strategy::kFull: {
        const auto t0 = Clock::now();
        PenaltyConfig cfg = base;
        cfg.constraint_tol = options.full_constraint_tol;
        const DirectResult full = penalty_minimize(data, start, cfg);
        row.wall_time = dlt_time + seconds_since(t0);
        x = full.x;
        pose_source = snap_to_feasible(x);
        break;
      }
      case Strategy::kWithoutConstraints: {
        x = without_constraints().x;
        row.wall_time = wc_time;
        pose_source = snap_to_feasible(x);
        break;
      }
      case Strategy::kOurPlusWc: {
        const Mat6 a = without_constraints().x;
        const auto t0 = Clock::now();
        const FitResult f = fit(FitProblem(a), options.solver);
        row.wall_time = wc_time + seconds_since(t0);
        x = f.gem.matrix();
        pose_source = f.gem;
        break;
      }
      case Strategy::kDlt: {
        x = start;
        row.wall_time = dlt_time;
        pose_source = snap_to_feasible(x);
        break;
      }
      case Strategy::kOurPlusDlt: {
        const auto t0 = Clock::now();
        const FitResult f = fit(FitProblem(start), options.solver);
        row.wall_time = dlt_time + seconds_since(t0);
        x = f.gem.matrix();
        pose_source = f.gem;
        break;
      }
    }
    row.mean_abs_residual = mean_abs_residual(x, corr);
    row.feasibility_violation = max_violation(x);
    fill_errors(pose_source, corr.truth, row.rotation_error, row.translation_direction_error);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gemfit
