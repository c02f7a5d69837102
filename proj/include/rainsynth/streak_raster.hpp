#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "rainsynth/geometry.hpp"
#include "rainsynth/rain_field.hpp"

namespace rainsynth {

/// Image-space trace of one raindrop over the exposure interval. p0/p1 are
/// the projected drop positions at exposure start/end; mid_px is the
/// projection of the world-space midpoint (not the average of p0 and p1,
/// which differs under perspective).
struct Streak {
  Eigen::Vector2d p0 = Eigen::Vector2d::Zero();
  Eigen::Vector2d p1 = Eigen::Vector2d::Zero();
  Eigen::Vector2d mid_px = Eigen::Vector2d::Zero();
  double width_px = 0.5;
  double intensity = 0.0;
  double depth_m = 0.0;

  double length_px() const { return (p1 - p0).norm(); }
};

/// Single-channel streak intensity raster, values in [0,1], row-major.
struct RainMask {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int x, int y) const { return values[std::size_t(y) * width + x]; }
};

// Photometric streak constants. Nearby slow drops render brighter than
// distant fast ones; none of this is radiometrically calibrated.
inline constexpr double kStreakBaseIntensity = 0.8;
inline constexpr double kStreakDepthFalloffM = 20.0;
inline constexpr double kStreakReferenceLengthPx = 20.0;
inline constexpr double kMinStreakWidthPx = 0.5;

/// Projects one drop over the exposure window. Empty when the streak is
/// culled: both endpoints outside the frustum (near..far, image bounds), any
/// endpoint behind the camera, or midpoint closer than the near plane.
inline std::optional<Streak> streak_for_drop(const Raindrop& drop,
                                             const Camera& camera,
                                             double exposure_s, double near_m,
                                             double far_m) {
  const Eigen::Vector3d w0 = drop.position;
  const Eigen::Vector3d w1 = drop.position + drop.velocity * exposure_s;
  const Eigen::Vector3d wm = drop.position + drop.velocity * (exposure_s / 2.0);

  const auto proj0 = project(w0, camera);
  const auto proj1 = project(w1, camera);
  const auto projm = project(wm, camera);
  if (!proj0 || !proj1 || !projm) return std::nullopt;
  if (projm->depth < near_m) return std::nullopt;

  const bool in0 = frustum_contains(w0, camera, near_m, far_m);
  const bool in1 = frustum_contains(w1, camera, near_m, far_m);
  if (!in0 && !in1) return std::nullopt;

  Streak s;
  s.p0 = proj0->pixel;
  s.p1 = proj1->pixel;
  s.mid_px = projm->pixel;
  s.depth_m = projm->depth;
  s.width_px = std::max(
      camera.intrinsics.fx * (drop.diameter_mm * 1e-3) / projm->depth,
      kMinStreakWidthPx);
  const double length = std::max(s.length_px(), 1.0);
  s.intensity = kStreakBaseIntensity *
                std::min(1.0, s.width_px * kStreakReferenceLengthPx / length) /
                (1.0 + projm->depth / kStreakDepthFalloffM);
  return s;
}

namespace detail {

/// Distance from a point to a segment (closest point clamped to [p0, p1]).
inline double point_segment_distance(const Eigen::Vector2d& p,
                                     const Eigen::Vector2d& a,
                                     const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

}  // namespace detail

/// Draws streaks as anti-aliased segments with a Gaussian cross-section
/// (sigma = width/2, support cut at 3 sigma). Contributions accumulate in an
/// unclamped buffer and are clamped to [0,1] once at the end, which makes the
/// result independent of streak order up to float associativity.
inline RainMask rasterize(const std::vector<Streak>& streaks, int width,
                          int height) {
  RainMask mask;
  mask.width = width;
  mask.height = height;
  mask.values.assign(std::size_t(width) * height, 0.0);
  for (const Streak& s : streaks) {
    const double sigma = s.width_px / 2.0;
    const double reach = 3.0 * sigma;
    const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
    const double x_lo = std::min(s.p0.x(), s.p1.x()) - reach;
    const double x_hi = std::max(s.p0.x(), s.p1.x()) + reach;
    const double y_lo = std::min(s.p0.y(), s.p1.y()) - reach;
    const double y_hi = std::max(s.p0.y(), s.p1.y()) + reach;
    // Pixel (i,j) is sampled at its center (i+0.5, j+0.5).
    const int ix_lo = std::max(0, static_cast<int>(std::floor(x_lo - 0.5)));
    const int ix_hi =
        std::min(width - 1, static_cast<int>(std::ceil(x_hi - 0.5)));
    const int iy_lo = std::max(0, static_cast<int>(std::floor(y_lo - 0.5)));
    const int iy_hi =
        std::min(height - 1, static_cast<int>(std::ceil(y_hi - 0.5)));
    for (int y = iy_lo; y <= iy_hi; ++y) {
      for (int x = ix_lo; x <= ix_hi; ++x) {
        const Eigen::Vector2d center(x + 0.5, y + 0.5);
        const double d = detail::point_segment_distance(center, s.p0, s.p1);
        if (d > reach) continue;
        mask.values[std::size_t(y) * width + x] +=
            s.intensity * std::exp(-d * d * inv_two_sigma2);
      }
    }
  }
  for (double& v : mask.values) v = std::clamp(v, 0.0, 1.0);
  return mask;
}

/// The full rendering operator for one view: sample the drop ensemble at a
/// point in time, project each drop against this camera, rasterize. A pure
/// function of its inputs.
inline RainMask render_view(const RainParams& params, const RainVolume& volume,
                            const Camera& camera, double time_s,
                            double exposure_s, double near_m,
                            const Eigen::Vector3d& up) {
  const std::vector<Raindrop> drops = sample_drops(params, volume, up, time_s);
  std::vector<Streak> streaks;
  streaks.reserve(drops.size());
  for (const Raindrop& drop : drops) {
    if (auto s =
            streak_for_drop(drop, camera, exposure_s, near_m, params.max_depth))
      streaks.push_back(*s);
  }
  return rasterize(streaks, camera.intrinsics.width, camera.intrinsics.height);
}

}  // namespace rainsynth
