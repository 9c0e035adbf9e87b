#include "gemfit/model.hpp"

namespace gemfit {

PluckerLine PluckerLine::through(const Vec3& point, const Vec3& direction) {
  const Vec3 d = direction.normalized();
  return {d, point.cross(d)};
}

Vec6 PluckerLine::vector() const {
  Vec6 v;
  v << d, m;
  return v;
}

PluckerLine PluckerLine::normalized() const {
  const double s = d.norm();
  return {d / s, m / s};
}

Mat6 GeneralizedEssentialMatrix::matrix() const { return assemble(r, t); }

Mat6 assemble(const RotationMatrix& r, const Vec3& t) {
  Mat6 x;
  x.topLeftCorner<3, 3>() = hat(t) * r.matrix();
  x.topRightCorner<3, 3>() = r.matrix();
  x.bottomLeftCorner<3, 3>() = r.matrix();
  x.bottomRightCorner<3, 3>().setZero();
  return x;
}

Blocks decompose_blocks(const Mat6& a) {
  return {a.topLeftCorner<3, 3>(), a.topRightCorner<3, 3>(), a.bottomLeftCorner<3, 3>(),
          a.bottomRightCorner<3, 3>()};
}

Mat6 compose_blocks(const Blocks& b) {
  Mat6 a;
  a << b.a11, b.a12, b.a21, b.a22;
  return a;
}

FitProblem::FitProblem(const Mat6& a) : a_(a) {
  const Blocks b = decompose_blocks(a);
  m_ = b.a11;
  n_ = (b.a12 + b.a21).transpose();
  alpha_ = 6.0 + frobenius_sq(b.a12) + frobenius_sq(b.a21) + frobenius_sq(b.a22);
  beta_ = alpha_ + 0.5 * frobenius_sq(b.a11);
}

double objective_f(const FitProblem& problem, const RotationMatrix& r, const Vec3& t) {
  return frobenius_sq(problem.m() - hat(t) * r.matrix()) -
         2.0 * trace_product(problem.n(), r.matrix()) + problem.alpha();
}

SkewSymmetric3 nearest_skew(const Mat3& b) {
  return SkewSymmetric3(Vec3(0.5 * (b(2, 1) - b(1, 2)), 0.5 * (b(0, 2) - b(2, 0)),
                             0.5 * (b(1, 0) - b(0, 1))));
}

SkewSymmetric3 optimal_t_hat(const Mat3& m, const RotationMatrix& r) {
  return nearest_skew(m * r.matrix().transpose());
}

double objective_g(const FitProblem& problem, const RotationMatrix& r) {
  const Mat3 b = problem.m().transpose() * r.matrix();
  return 0.5 * trace_product(b, b) - 2.0 * trace_product(problem.n(), r.matrix()) +
         problem.beta();
}

double objective_g_explicit(const FitProblem& problem, const RotationMatrix& r) {
  const Mat3 b = problem.m().transpose() * r.matrix();
  return 0.5 * (b * b).trace() - 2.0 * (problem.n() * r.matrix()).trace() + problem.beta();
}

double objective_g_decrease(const FitProblem& problem, const Mat3& x, const Mat3& delta) {
  const Mat3 mt = problem.m().transpose();
  const Mat3 db = mt * delta;
  const Mat3 sb = mt * (2.0 * x + delta);
  return -0.5 * trace_product(db, sb) + 2.0 * trace_product(problem.n(), delta);
}

Mat3 euclidean_grad(const FitProblem& problem, const RotationMatrix& x) {
  return problem.m() * x.matrix().transpose() * problem.m() - 2.0 * problem.n().transpose();
}

Mat3 riemannian_grad(const FitProblem& problem, const RotationMatrix& x) {
  const Mat3 g = euclidean_grad(problem, x);
  return g - x.matrix() * g.transpose() * x.matrix();
}

double epipolar_residual(const Mat6& x, const PluckerLine& left, const PluckerLine& right) {
  return left.vector().dot(x * right.vector());
}

Pose extract_pose(const GeneralizedEssentialMatrix& fit) { return {fit.r, fit.t}; }

GeneralizedEssentialMatrix recover(const FitProblem& problem, const RotationMatrix& r) {
  return {r, optimal_t_hat(problem.m(), r).axis()};
}

}  // namespace gemfit
