#include "gemfit/direct.hpp"

#include <Eigen/Cholesky>
#include <array>
#include <chrono>
#include <cmath>

#include "gemfit/error.hpp"
#include "gemfit/model.hpp"

namespace gemfit {

namespace {

constexpr std::array<std::array<int, 2>, 6> kUpper{{{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}}};
constexpr std::array<std::array<int, 2>, 3> kLower{{{1, 0}, {2, 0}, {2, 1}}};

constexpr int idx(int row, int col) { return 6 * row + col; }

using Vec36 = Eigen::Matrix<double, 36, 1>;

Vec36 vec(const Mat6& x) {
  Vec36 v;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) v(idx(i, j)) = x(i, j);
  return v;
}

Mat6 unvec(const Vec36& v) {
  Mat6 x;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) x(i, j) = v(idx(i, j));
  return x;
}

// Jacobian rows of (X12^T X12)(a, b) with respect to X12(k, c) = X(k, 3 + c).
void orthogonality_row(const Mat6& x, int a, int b, ConstraintJacobian& jac, int row) {
  for (int k = 0; k < 3; ++k) {
    jac(row, idx(k, 3 + a)) += x(k, 3 + b);
    jac(row, idx(k, 3 + b)) += x(k, 3 + a);
  }
}

}  // namespace

ConstraintVector constraint_residuals(const Mat6& x) {
  const Blocks b = decompose_blocks(x);
  const Mat3 orth = b.a12.transpose() * b.a12 - Mat3::Identity();
  const Mat3 skew = b.a11 * b.a12.transpose() + b.a12 * b.a11.transpose();
  const Mat3 sym = b.a21 - b.a12;

  ConstraintVector c;
  int k = 0;
  for (const auto& [i, j] : kUpper) c(k++) = orth(i, j);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) c(k++) = sym(i, j);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) c(k++) = b.a22(i, j);
  for (const auto& [i, j] : kUpper) c(k++) = skew(i, j);
  for (const auto& [i, j] : kLower) c(k++) = orth(i, j);
  return c;
}

ConstraintJacobian constraint_jacobian(const Mat6& x) {
  ConstraintJacobian jac = ConstraintJacobian::Zero();
  int k = 0;
  for (const auto& [a, b] : kUpper) orthogonality_row(x, a, b, jac, k++);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      jac(k, idx(3 + i, j)) = 1.0;
      jac(k, idx(i, 3 + j)) = -1.0;
      ++k;
    }
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) jac(k++, idx(3 + i, 3 + j)) = 1.0;
  // (X11 X12^T + X12 X11^T)(a, b) = sum_m X11(a,m) X12(b,m) + X12(a,m) X11(b,m)
  for (const auto& [a, b] : kUpper) {
    for (int m = 0; m < 3; ++m) {
      jac(k, idx(a, m)) += x(b, 3 + m);
      jac(k, idx(b, 3 + m)) += x(a, m);
      jac(k, idx(a, 3 + m)) += x(b, m);
      jac(k, idx(b, m)) += x(a, 3 + m);
    }
    ++k;
  }
  for (const auto& [a, b] : kLower) orthogonality_row(x, a, b, jac, k++);
  return jac;
}

double max_violation(const Mat6& x) { return constraint_residuals(x).cwiseAbs().maxCoeff(); }

void PenaltyConfig::validate() const {
  if (!(initial_weight > 0.0)) {
    throw Error(ErrorCategory::kPrecondition, "penalty: initial_weight must be positive");
  }
  if (!(weight_growth > 1.0)) {
    throw Error(ErrorCategory::kPrecondition, "penalty: weight_growth must exceed 1");
  }
  if (outer_iters < 1 || inner_max_iter < 1) {
    throw Error(ErrorCategory::kPrecondition, "penalty: iteration counts must be >= 1");
  }
}

QuadraticData QuadraticData::frobenius(const Mat6& a) {
  return {MatX::Identity(36, 36), vec(a)};
}

GeneralizedEssentialMatrix snap_to_feasible(const Mat6& x) {
  const Blocks b = decompose_blocks(x);
  const RotationMatrix r = nearest_rotation(b.a12);
  return {r, nearest_skew(b.a11 * r.matrix().transpose()).axis()};
}

DirectResult penalty_minimize(const QuadraticData& data, const Mat6& start,
                              const PenaltyConfig& config) {
  config.validate();
  if (data.weight.rows() != 36 || data.weight.cols() != 36 || data.target.size() != 36) {
    throw Error(ErrorCategory::kDimension, "penalty: data term must be 36-dimensional");
  }
  const auto clock_start = std::chrono::steady_clock::now();
  const Eigen::Matrix<double, 36, 36> w_data = data.weight;
  const Vec36 target = data.target;

  auto objective = [&](const Vec36& v, double weight) {
    const Vec36 e = v - target;
    return e.dot(w_data * e) + weight * constraint_residuals(unvec(v)).squaredNorm();
  };

  DirectResult out;
  Vec36 v = vec(start);
  double weight = config.initial_weight;
  int iterations = 0;
  for (int outer = 0; outer < config.outer_iters; ++outer) {
    std::vector<double> history;
    double phi = objective(v, weight);
    history.push_back(phi);
    for (int inner = 0; inner < config.inner_max_iter; ++inner) {
      const Mat6 x = unvec(v);
      const ConstraintVector c = constraint_residuals(x);
      const ConstraintJacobian jac = constraint_jacobian(x);
      const Vec36 grad = 2.0 * (w_data * (v - target)) + 2.0 * weight * (jac.transpose() * c);
      Eigen::Matrix<double, 36, 36> hess = 2.0 * w_data + 2.0 * weight * (jac.transpose() * jac);
      hess.diagonal().array() += 1e-12 * (1.0 + hess.diagonal().cwiseAbs().maxCoeff());
      const Vec36 dir = -hess.ldlt().solve(grad);
      const double slope = grad.dot(dir);
      if (!(slope < 0.0)) break;

      double step = 1.0;
      double trial = objective(v + dir, weight);
      int backtracks = 0;
      while (trial > phi + config.armijo_c * step * slope && backtracks < 60) {
        step *= 0.5;
        trial = objective(v + step * dir, weight);
        ++backtracks;
      }
      ++iterations;
      if (!(trial <= phi)) break;
      v += step * dir;
      const double change = phi - trial;
      phi = trial;
      history.push_back(phi);
      if (step * dir.norm() <= config.inner_tol * (1.0 + v.norm()) ||
          change <= 1e-16 * std::abs(phi)) {
        break;
      }
    }
    out.inner_objective.push_back(std::move(history));
    out.outer_violation.push_back(max_violation(unvec(v)));
    if (out.outer_violation.back() <= config.constraint_tol) break;
    weight *= config.weight_growth;
  }

  out.x = unvec(v);
  out.pre_snap_violation = max_violation(out.x);
  if (config.snap) out.x = snap_to_feasible(out.x).matrix();
  out.post_snap_violation = max_violation(out.x);

  const Vec36 e = vec(out.x) - target;
  out.report.iterations = iterations;
  out.report.objective_value = e.dot(w_data * e);
  out.report.residual = std::sqrt(std::max(0.0, out.report.objective_value));
  out.report.converged = out.pre_snap_violation <= config.constraint_tol;
  out.report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  return out;
}

DirectResult fit_direct(const Mat6& a, const PenaltyConfig& config) {
  return penalty_minimize(QuadraticData::frobenius(a), a, config);
}

}  // namespace gemfit
