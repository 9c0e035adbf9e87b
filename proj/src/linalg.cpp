#include "gemfit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gemfit/error.hpp"

namespace gemfit {

RotationMatrix RotationMatrix::from_matrix(const Mat3& m, double tol) {
  RotationMatrix r(m);
  if (!m.allFinite() || r.orthogonality_defect() > tol || r.determinant_defect() > tol) {
    std::ostringstream msg;
    msg << "matrix is not a rotation (orthogonality defect " << r.orthogonality_defect()
        << ", determinant defect " << r.determinant_defect() << ")";
    throw Error(ErrorCategory::kPrecondition, msg.str());
  }
  return r;
}

double RotationMatrix::orthogonality_defect() const {
  return (m_.transpose() * m_ - Mat3::Identity()).cwiseAbs().maxCoeff();
}

double RotationMatrix::determinant_defect() const { return std::abs(m_.determinant() - 1.0); }

Mat3 SkewSymmetric3::matrix() const { return hat(axis_); }

Mat3 hat(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

Vec3 unhat(const Mat3& s, double tol) {
  const double sym = (0.5 * (s + s.transpose())).cwiseAbs().maxCoeff();
  if (!(sym <= tol)) {
    std::ostringstream msg;
    msg << "unhat: symmetric part " << sym << " exceeds tolerance " << tol;
    throw Error(ErrorCategory::kPrecondition, msg.str());
  }
  return {0.5 * (s(2, 1) - s(1, 2)), 0.5 * (s(0, 2) - s(2, 0)), 0.5 * (s(1, 0) - s(0, 1))};
}

void throw_not_conformable(Eigen::Index a_rows, Eigen::Index a_cols, Eigen::Index b_rows,
                           Eigen::Index b_cols) {
  std::ostringstream msg;
  msg << "trace_product: shapes " << a_rows << "x" << a_cols << " and " << b_rows << "x" << b_cols
      << " are not conformable";
  throw Error(ErrorCategory::kDimension, msg.str());
}

Mat3 rodrigues_exp_minus_identity(const SkewSymmetric3& z, double mu) {
  const double norm = z.axis().norm();
  const double theta = mu * norm;
  if (std::abs(theta) < 1e-8) {
    const Mat3 k = -mu * hat(z.axis());
    const Mat3 k2 = k * k;
    return k + 0.5 * k2 + (1.0 / 6.0) * k2 * k;
  }
  // hat(u)^T = -hat(u) for the unit axis; 1 - cos(theta) = 2 sin^2(theta / 2).
  const Mat3 k = -hat(z.axis() / norm);
  const double half = std::sin(0.5 * theta);
  return std::sin(theta) * k + (2.0 * half * half) * (k * k);
}

RotationMatrix rodrigues_exp(const SkewSymmetric3& z, double mu) {
  return RotationMatrix::unchecked(Mat3::Identity() + rodrigues_exp_minus_identity(z, mu));
}

namespace {

constexpr int kSvdMaxSweeps = 30;
constexpr double kSvdThreshold = 1e-14;

Vec3 any_orthogonal(const Vec3& a) {
  Eigen::Index i = 0;
  a.cwiseAbs().minCoeff(&i);
  Vec3 e = Vec3::Zero();
  e(i) = 1.0;
  return a.cross(e).normalized();
}

}  // namespace

Svd3 svd3(const Mat3& m) {
  Mat3 w = m;
  Mat3 v = Mat3::Identity();

  for (int sweep = 0; sweep < kSvdMaxSweeps; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        const double alpha = w.col(p).squaredNorm();
        const double beta = w.col(q).squaredNorm();
        const double gamma = w.col(p).dot(w.col(q));
        if (gamma == 0.0 || std::abs(gamma) <= kSvdThreshold * std::sqrt(alpha * beta)) {
          continue;
        }
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Mat3* target : {&w, &v}) {
          const Vec3 cp = target->col(p);
          const Vec3 cq = target->col(q);
          target->col(p) = c * cp - s * cq;
          target->col(q) = s * cp + c * cq;
        }
      }
    }
    if (!rotated) break;
  }

  std::array<int, 3> order{0, 1, 2};
  Vec3 norms(w.col(0).norm(), w.col(1).norm(), w.col(2).norm());
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return norms(a) > norms(b); });

  Svd3 out;
  for (int i = 0; i < 3; ++i) {
    out.singular_values(i) = norms(order[i]);
    out.v.col(i) = v.col(order[i]);
    out.u.col(i) = w.col(order[i]);
  }

  const double s0 = out.singular_values(0);
  if (s0 == 0.0) {
    out.u = Mat3::Identity();
    return out;
  }
  const double floor = 1e-13 * s0;
  out.u.col(0) /= s0;
  if (out.singular_values(1) > floor) {
    out.u.col(1) /= out.singular_values(1);
  } else {
    out.u.col(1) = any_orthogonal(out.u.col(0));
  }
  if (out.singular_values(2) > floor) {
    out.u.col(2) /= out.singular_values(2);
  } else {
    out.u.col(2) = out.u.col(0).cross(out.u.col(1));
  }
  return out;
}

RotationMatrix procrustes_rotation(const Mat3& n) {
  const Svd3 svd = svd3(n.transpose());
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.u * svd.v.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return RotationMatrix::unchecked(svd.u * d * svd.v.transpose());
}

RotationMatrix nearest_rotation(const Mat3& m) { return procrustes_rotation(m.transpose()); }

SymmetricEigen symmetric_eigen(const Eigen::Ref<const MatX>& s, double symmetry_tol) {
  if (s.rows() != s.cols()) {
    throw Error(ErrorCategory::kDimension, "symmetric_eigen: matrix is not square");
  }
  const Eigen::Index n = s.rows();
  if (n == 0 || n > 36) {
    throw Error(ErrorCategory::kDimension, "symmetric_eigen: supported sizes are 1..36");
  }
  const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if (!(asym <= symmetry_tol * scale)) {
    throw Error(ErrorCategory::kPrecondition, "symmetric_eigen: matrix is not symmetric");
  }

  MatX a = 0.5 * (s + s.transpose());
  MatX vecs = MatX::Identity(n, n);
  const double total = a.norm();

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off == 0.0 || std::sqrt(off) <= 1e-15 * total) break;

    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * c;
        // A <- J^T A J with J the (p, q) plane rotation.
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = vecs(k, p);
          const double vkq = vecs(k, q);
          vecs(k, p) = c * vkp - sn * vkq;
          vecs(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });

  SymmetricEigen out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.eigenvalues(i) = a(order[static_cast<size_t>(i)], order[static_cast<size_t>(i)]);
    VecX col = vecs.col(order[static_cast<size_t>(i)]);
    col.normalize();
    for (Eigen::Index k = 0; k < n; ++k) {
      if (std::abs(col(k)) > 1e-12) {
        if (col(k) < 0.0) col = -col;
        break;
      }
    }
    out.eigenvectors.col(i) = col;
  }
  return out;
}

SmallestEigen smallest_eigvec_sym(const Eigen::Ref<const MatX>& s, double symmetry_tol) {
  const SymmetricEigen eig = symmetric_eigen(s, symmetry_tol);
  return {eig.eigenvectors.col(0), eig.eigenvalues(0)};
}

}  // namespace gemfit
