#include "gemfit/central_essential.hpp"

namespace gemfit {

EssentialMatrix project_to_essential(const Mat3& a) {
  const Svd3 svd = svd3(a);
  const double sigma = 0.5 * (svd.singular_values(0) + svd.singular_values(1));
  const Vec3 d(sigma, sigma, 0.0);
  return {svd.u * d.asDiagonal() * svd.v.transpose(), std::nullopt};
}

EssentialMatrix assemble_essential(const Vec3& t, const RotationMatrix& r) {
  return {hat(t) * r.matrix(), EssentialFactors{t, r}};
}

}  // namespace gemfit
