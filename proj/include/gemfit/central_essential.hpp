#pragma once

#include <optional>

#include "gemfit/linalg.hpp"

namespace gemfit {

struct EssentialFactors {
  Vec3 t;
  RotationMatrix r;
};

// 3x3 central essential matrix E = hat(t) * R. Singular values are (s, s, 0).
struct EssentialMatrix {
  Mat3 e;
  std::optional<EssentialFactors> factors;
};

// Closest essential matrix to `a` in Frobenius norm: u * diag(s, s, 0) * v^T
// where s is the mean of the two largest singular values of `a`.
EssentialMatrix project_to_essential(const Mat3& a);

EssentialMatrix assemble_essential(const Vec3& t, const RotationMatrix& r);

}  // namespace gemfit
