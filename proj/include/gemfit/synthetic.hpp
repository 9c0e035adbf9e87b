#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "gemfit/linalg.hpp"
#include "gemfit/model.hpp"

namespace gemfit {

// Seedable generator with a fixed, documented algorithm so that instances
// reproduce bit-for-bit across platforms:
//   engine   std::mt19937_64 (fully specified by the C++ standard)
//   uniform  (next() >> 11) * 2^-53, in [0, 1)
//   normal   Marsaglia polar method on 2 * uniform - 1, spare value cached
// Standard-library distributions are not used because their algorithms are
// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  Vec3 normal3() { return {normal(), normal(), normal()}; }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

// splitmix64 finalizer over the seed and a list of indices; used to give every
// benchmark cell and trial an independent stream.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> indices);

// Haar-uniform rotation from a normalized Gaussian quaternion.
RotationMatrix random_rotation(Rng& rng);

// Components uniform in [-1, 1].
Vec3 random_translation(Rng& rng);

struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

struct NoisyInstance {
  Mat6 a;
  double omega_norm = 0.0;  // |A - assemble(R, t)|_F
};

// A = assemble(R, t) + Omega, Omega entrywise N(0, sigma^2), filled row-major.
NoisyInstance noisy_instance(const RotationMatrix& r, const Vec3& t, const NoiseSpec& noise);
NoisyInstance noisy_instance(const RotationMatrix& r, const Vec3& t, double sigma, Rng& rng);

struct Correspondence {
  PluckerLine left;
  PluckerLine right;
};

struct GroundTruth {
  RotationMatrix r;
  Vec3 t;
};

// Line pairs meeting in space. The right frame maps into the left one by
// P_left = R * P_right + t, which makes left^T assemble(R, t) right = 0.
struct CorrespondenceSet {
  std::vector<Correspondence> pairs;
  std::optional<GroundTruth> truth;

  std::size_t size() const { return pairs.size(); }
};

struct SceneConfig {
  double box_half_width = 5.0;  // points uniform in [-w, w]^3
  double body_radius = 0.5;     // ray origins uniform in a ball of this radius
};

CorrespondenceSet generate_correspondences(const RotationMatrix& r, const Vec3& t, int n,
                                           Rng& rng, double line_noise = 0.0,
                                           const SceneConfig& scene = {});

// Known world lines, each observed by a bundle of camera rays. The camera
// pose maps camera coordinates to world ones: P_world = R * P_camera + t.
struct AbsoluteScene {
  std::vector<PluckerLine> world_lines;
  std::vector<std::vector<PluckerLine>> bundles;
  GroundTruth truth;
};

AbsoluteScene generate_absolute_scene(const RotationMatrix& r, const Vec3& t, int n_lines,
                                      int rays_per_line, Rng& rng, double line_noise = 0.0,
                                      const SceneConfig& scene = {});

// Rotates the direction by exactly `angle` radians about a random axis
// orthogonal to it, keeping the line through `origin`.
PluckerLine perturb_line(const Vec3& origin, const Vec3& direction, double angle, Rng& rng);

}  // namespace gemfit
