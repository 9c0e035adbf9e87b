#pragma once

#include "gemfit/linalg.hpp"

namespace gemfit {

// Plucker line (direction; moment). The 6-vector ordering is fixed as (d; m).
struct PluckerLine {
  Vec3 d = Vec3::UnitX();
  Vec3 m = Vec3::Zero();

  // Line through `point` with direction `direction`, direction normalized.
  static PluckerLine through(const Vec3& point, const Vec3& direction);

  Vec6 vector() const;
  double orthogonality_defect() const { return std::abs(d.dot(m)); }
  PluckerLine normalized() const;
};

// 6x6 block form [hat(t) R, R; R, 0] stored by its factors.
struct GeneralizedEssentialMatrix {
  RotationMatrix r;
  Vec3 t = Vec3::Zero();

  Mat6 matrix() const;
};

struct Blocks {
  Mat3 a11, a12, a21, a22;
};

Mat6 assemble(const RotationMatrix& r, const Vec3& t);
Blocks decompose_blocks(const Mat6& a);
Mat6 compose_blocks(const Blocks& b);

// An input matrix A with the quantities the reduced objective needs:
//   M = A11, N = (A12 + A21)^T,
//   alpha = 6 + |A12|^2 + |A21|^2 + |A22|^2,
//   beta  = alpha + |A11|^2 / 2.
class FitProblem {
 public:
  explicit FitProblem(const Mat6& a);

  const Mat6& a() const { return a_; }
  const Mat3& m() const { return m_; }
  const Mat3& n() const { return n_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

 private:
  Mat6 a_;
  Mat3 m_;
  Mat3 n_;
  double alpha_;
  double beta_;
};

// |assemble(R, t) - A|^2 via |M - hat(t) R|^2 - 2 tr(N R) + alpha.
double objective_f(const FitProblem& problem, const RotationMatrix& r, const Vec3& t);

SkewSymmetric3 nearest_skew(const Mat3& b);

// argmin over skew S of |M - S R|: the skew part of M R^T.
SkewSymmetric3 optimal_t_hat(const Mat3& m, const RotationMatrix& r);

// g(R) = tr((M^T R)^2) / 2 - 2 tr(N R) + beta, traces via Hadamard sums.
double objective_g(const FitProblem& problem, const RotationMatrix& r);

// Same value through explicit matrix products; kept for oracle tests.
double objective_g_explicit(const FitProblem& problem, const RotationMatrix& r);

// g(X) - g(Y) for Y = X + delta, in a form that does not cancel
// catastrophically when delta is small:
//   tr((M^T X)^2) - tr((M^T Y)^2) = -tr(M^T delta * M^T (X + Y)).
double objective_g_decrease(const FitProblem& problem, const Mat3& x, const Mat3& delta);

Mat3 euclidean_grad(const FitProblem& problem, const RotationMatrix& x);
Mat3 riemannian_grad(const FitProblem& problem, const RotationMatrix& x);

// lL^T X lR.
double epipolar_residual(const Mat6& x, const PluckerLine& left, const PluckerLine& right);

struct Pose {
  RotationMatrix r;
  Vec3 t;
};

Pose extract_pose(const GeneralizedEssentialMatrix& fit);

// Solution of the reduced problem at a given rotation.
GeneralizedEssentialMatrix recover(const FitProblem& problem, const RotationMatrix& r);

}  // namespace gemfit
