#pragma once

#include <Eigen/Dense>

#include <array>

namespace gemfit {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

// A 3x3 matrix known to be in SO(3). Construction through `from_matrix`
// validates orthogonality and orientation; `unchecked` is for values that
// are rotations by construction (exponentials, Procrustes, products).
class RotationMatrix {
 public:
  static constexpr double kTolerance = 1e-10;

  RotationMatrix() : m_(Mat3::Identity()) {}

  static RotationMatrix identity() { return RotationMatrix(); }
  static RotationMatrix from_matrix(const Mat3& m, double tol = kTolerance);
  static RotationMatrix unchecked(const Mat3& m) { return RotationMatrix(m); }

  const Mat3& matrix() const { return m_; }
  RotationMatrix transpose() const { return RotationMatrix(m_.transpose()); }

  // Largest entry of |R^T R - I| and |det(R) - 1|.
  double orthogonality_defect() const;
  double determinant_defect() const;

  friend RotationMatrix operator*(const RotationMatrix& a, const RotationMatrix& b) {
    return RotationMatrix(a.m_ * b.m_);
  }

 private:
  explicit RotationMatrix(const Mat3& m) : m_(m) {}
  Mat3 m_;
};

// Skew-symmetric 3x3 matrix stored by its axis vector.
class SkewSymmetric3 {
 public:
  SkewSymmetric3() : axis_(Vec3::Zero()) {}
  explicit SkewSymmetric3(const Vec3& axis) : axis_(axis) {}

  const Vec3& axis() const { return axis_; }
  Mat3 matrix() const;

 private:
  Vec3 axis_;
};

Mat3 hat(const Vec3& v);

// Throws Error(kPrecondition) when the symmetric part of `s` exceeds `tol`.
Vec3 unhat(const Mat3& s, double tol = 1e-9);

template <typename Derived>
double frobenius_sq(const Eigen::MatrixBase<Derived>& x) {
  return x.squaredNorm();
}

[[noreturn]] void throw_not_conformable(Eigen::Index a_rows, Eigen::Index a_cols,
                                       Eigen::Index b_rows, Eigen::Index b_cols);

// trace(A * B) as the sum of the entries of A o B^T; the product is never
// formed. Throws Error(kDimension) unless A is n x m and B is m x n.
template <typename DerivedA, typename DerivedB>
double trace_product(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != b.cols() || a.cols() != b.rows()) {
    throw_not_conformable(a.rows(), a.cols(), b.rows(), b.cols());
  }
  return a.cwiseProduct(b.transpose()).sum();
}

// expm(-mu * hat(z)) by the closed axis-angle form with theta = mu * |z|.
RotationMatrix rodrigues_exp(const SkewSymmetric3& z, double mu);

// expm(-mu * hat(z)) - I, evaluated without forming I + ... first, so that
// small steps keep full relative precision.
Mat3 rodrigues_exp_minus_identity(const SkewSymmetric3& z, double mu);

struct Svd3 {
  Mat3 u;
  Vec3 singular_values;  // descending, non-negative
  Mat3 v;
};

// One-sided cyclic Jacobi SVD: m = u * diag(s) * v^T.
Svd3 svd3(const Mat3& m);

// argmax over SO(3) of trace(n * R).
RotationMatrix procrustes_rotation(const Mat3& n);

// Nearest rotation to `m` in the Frobenius sense.
RotationMatrix nearest_rotation(const Mat3& m);

struct SymmetricEigen {
  VecX eigenvalues;   // ascending
  MatX eigenvectors;  // columns, matching eigenvalues
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix (n <= 36). Each
// eigenvector is signed so its first non-negligible component is positive.
SymmetricEigen symmetric_eigen(const Eigen::Ref<const MatX>& s, double symmetry_tol = 1e-9);

struct SmallestEigen {
  VecX vector;
  double value = 0.0;
};

SmallestEigen smallest_eigvec_sym(const Eigen::Ref<const MatX>& s, double symmetry_tol = 1e-9);

}  // namespace gemfit
