#include "gemfit/synthetic.hpp"

#include <cmath>

#include "gemfit/error.hpp"

namespace gemfit {

double Rng::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  return u * factor;
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> indices) {
  auto mix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  std::uint64_t h = mix(seed);
  for (std::uint64_t i : indices) h = mix(h ^ mix(i));
  return h;
}

RotationMatrix random_rotation(Rng& rng) {
  Eigen::Vector4d q;
  do {
    q << rng.normal(), rng.normal(), rng.normal(), rng.normal();
  } while (q.norm() < 1e-12);
  q.normalize();
  const double w = q(0), x = q(1), y = q(2), z = q(3);
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
       2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
       2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return RotationMatrix::unchecked(r);
}

Vec3 random_translation(Rng& rng) {
  return {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
}

NoisyInstance noisy_instance(const RotationMatrix& r, const Vec3& t, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw Error(ErrorCategory::kPrecondition, "noise sigma must be >= 0");
  Mat6 omega = Mat6::Zero();
  if (sigma > 0.0) {
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) omega(i, j) = sigma * rng.normal();
  }
  return {assemble(r, t) + omega, omega.norm()};
}

NoisyInstance noisy_instance(const RotationMatrix& r, const Vec3& t, const NoiseSpec& noise) {
  Rng rng(noise.seed);
  return noisy_instance(r, t, noise.sigma, rng);
}

namespace {

Vec3 point_in_ball(Rng& rng, double radius) {
  Vec3 p;
  do {
    p = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  } while (p.squaredNorm() > 1.0);
  return radius * p;
}

Vec3 point_in_box(Rng& rng, double half_width) {
  return {rng.uniform(-half_width, half_width), rng.uniform(-half_width, half_width),
          rng.uniform(-half_width, half_width)};
}

}  // namespace

PluckerLine perturb_line(const Vec3& origin, const Vec3& direction, double angle, Rng& rng) {
  const Vec3 d = direction.normalized();
  if (angle == 0.0) return PluckerLine::through(origin, d);
  Vec3 axis;
  do {
    axis = d.cross(rng.normal3());
  } while (axis.norm() < 1e-9);
  axis.normalize();
  const Vec3 rotated = std::cos(angle) * d + std::sin(angle) * axis.cross(d);
  return PluckerLine::through(origin, rotated);
}

CorrespondenceSet generate_correspondences(const RotationMatrix& r, const Vec3& t, int n,
                                           Rng& rng, double line_noise,
                                           const SceneConfig& scene) {
  if (n < 1) throw Error(ErrorCategory::kPrecondition, "correspondence count must be >= 1");
  CorrespondenceSet set;
  set.truth = GroundTruth{r, t};
  set.pairs.reserve(static_cast<std::size_t>(n));
  const Mat3 rt = r.matrix().transpose();
  while (static_cast<int>(set.pairs.size()) < n) {
    const Vec3 point_left = point_in_box(rng, scene.box_half_width);
    const Vec3 point_right = rt * (point_left - t);
    const Vec3 origin_left = point_in_ball(rng, scene.body_radius);
    const Vec3 origin_right = point_in_ball(rng, scene.body_radius);
    const Vec3 dir_left = point_left - origin_left;
    const Vec3 dir_right = point_right - origin_right;
    if (dir_left.norm() < 0.1 || dir_right.norm() < 0.1) continue;
    set.pairs.push_back({perturb_line(origin_left, dir_left, line_noise, rng),
                         perturb_line(origin_right, dir_right, line_noise, rng)});
  }
  return set;
}

AbsoluteScene generate_absolute_scene(const RotationMatrix& r, const Vec3& t, int n_lines,
                                      int rays_per_line, Rng& rng, double line_noise,
                                      const SceneConfig& scene) {
  if (n_lines < 1 || rays_per_line < 1) {
    throw Error(ErrorCategory::kPrecondition, "absolute scene needs lines and rays");
  }
  AbsoluteScene out;
  out.truth = {r, t};
  const Mat3 rt = r.matrix().transpose();
  for (int i = 0; i < n_lines; ++i) {
    const Vec3 anchor = point_in_box(rng, scene.box_half_width);
    Vec3 direction;
    do {
      direction = rng.normal3();
    } while (direction.norm() < 1e-6);
    direction.normalize();
    out.world_lines.push_back(PluckerLine::through(anchor, direction));

    std::vector<PluckerLine> bundle;
    while (static_cast<int>(bundle.size()) < rays_per_line) {
      const Vec3 world_point = anchor + rng.uniform(-2.0, 2.0) * direction;
      const Vec3 camera_point = rt * (world_point - t);
      const Vec3 origin = point_in_ball(rng, scene.body_radius);
      const Vec3 ray = camera_point - origin;
      if (ray.norm() < 0.1) continue;
      bundle.push_back(perturb_line(origin, ray, line_noise, rng));
    }
    out.bundles.push_back(std::move(bundle));
  }
  return out;
}

}  // namespace gemfit
