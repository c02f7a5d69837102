#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "rainsynth/errors.hpp"
#include "rainsynth/geometry.hpp"

namespace rainsynth {

/// Physical rain controls: density (drops/m^3), render depth (m), wind speed
/// (m/s), wind azimuth (rad, same horizontal frame as camera azimuths), a hard
/// particle-count cap, and a dimensionless drop size multiplier.
struct RainParams {
  double density = 0.1;
  double max_depth = 20.0;
  double wind_speed = 0.0;
  double wind_azimuth = 0.0;
  std::uint64_t max_drops = 1'000'000;
  double drop_scale = 1.0;

  bool valid() const {
    return density >= 0.0 && max_depth > 0.0 && wind_speed >= 0.0 &&
           max_drops > 0 && drop_scale > 0.0 && drop_scale <= 100.0;
  }
};

/// Axis-aligned world-space box the rain lives in, with the seed that fixes
/// the particle realization. Drops wrap around its faces (torus topology).
struct RainVolume {
  Eigen::Vector3d min_corner = Eigen::Vector3d::Zero();
  Eigen::Vector3d max_corner = Eigen::Vector3d::Ones();
  std::uint64_t seed = 0;

  Eigen::Vector3d extent() const { return max_corner - min_corner; }
  double volume_m3() const {
    const Eigen::Vector3d e = extent();
    return e.x() * e.y() * e.z();
  }
};

struct Raindrop {
  std::uint64_t drop_id = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  double diameter_mm = 1.0;
};

namespace detail {

// SplitMix64 finalizer; chained to make an order-independent counter hash.
inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t counter_hash(std::uint64_t seed,
                                            std::uint64_t index,
                                            std::uint64_t stream) {
  return splitmix64(splitmix64(splitmix64(seed) ^ index) ^ stream);
}

/// Uniform in [0, 1), 53-bit resolution.
inline double uniform01(std::uint64_t seed, std::uint64_t index,
                        std::uint64_t stream) {
  return static_cast<double>(counter_hash(seed, index, stream) >> 11) *
         0x1.0p-53;
}

// Streams per drop in the counter hash.
inline constexpr std::uint64_t kStreamPosX = 0;
inline constexpr std::uint64_t kStreamPosY = 1;
inline constexpr std::uint64_t kStreamPosZ = 2;
inline constexpr std::uint64_t kStreamDiameter = 3;

/// Wraps x into [lo, hi) on a torus. In-range values pass through untouched
/// so zero-time sampling is bit-exact.
inline double wrap_into(double x, double lo, double hi) {
  if (x >= lo && x < hi) return x;
  const double ext = hi - lo;
  double y = std::fmod(x - lo, ext);
  if (y < 0.0) y += ext;
  // fmod can land exactly on ext through rounding of the negative branch
  if (y >= ext) y = 0.0;
  return lo + y;
}

}  // namespace detail

/// Atlas terminal fall speed for a drop diameter in mm, in m/s, clamped away
/// from zero so every drop falls.
inline double terminal_fall_speed(double diameter_mm) {
  const double v = 9.65 - 10.3 * std::exp(-0.6 * diameter_mm);
  return std::max(v, 0.5);
}

// Diameter bounds keep the Raindrop size invariant valid for extreme
// drop_scale settings.
inline constexpr double kMinDiameterMm = 0.2;
inline constexpr double kMaxDiameterMm = 10.0;

/// Number of drops realized in the volume: the density-derived count capped
/// by max_drops.
inline std::uint64_t drop_count(const RainParams& params,
                                const RainVolume& volume) {
  const double wanted = params.density * volume.volume_m3();
  const auto rounded = static_cast<std::uint64_t>(std::llround(wanted));
  return std::min(params.max_drops, rounded);
}

/// Deterministic drop ensemble at a point in time. Initial positions and
/// diameters come from a counter-based hash of (seed, drop index), so the
/// result is a pure function of its inputs regardless of evaluation order.
/// Drops fall along -up at terminal speed and drift with the wind; positions
/// advance ballistically and wrap inside the volume.
inline std::vector<Raindrop> sample_drops(const RainParams& params,
                                          const RainVolume& volume,
                                          const Eigen::Vector3d& up,
                                          double time_s) {
  const std::uint64_t count = drop_count(params, volume);
  const HorizontalFrame frame = horizontal_frame(up);
  const Eigen::Vector3d wind =
      params.wind_speed * (std::cos(params.wind_azimuth) * frame.reference +
                           std::sin(params.wind_azimuth) * frame.binormal);
  const Eigen::Vector3d lo = volume.min_corner;
  const Eigen::Vector3d hi = volume.max_corner;

  std::vector<Raindrop> drops;
  drops.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Raindrop d;
    d.drop_id = i;
    const double raw_mm =
        params.drop_scale *
        (0.5 + detail::uniform01(volume.seed, i, detail::kStreamDiameter));
    d.diameter_mm = std::clamp(raw_mm, kMinDiameterMm, kMaxDiameterMm);
    d.velocity = wind - terminal_fall_speed(d.diameter_mm) * up;
    const Eigen::Vector3d initial(
        lo.x() + detail::uniform01(volume.seed, i, detail::kStreamPosX) *
                     (hi.x() - lo.x()),
        lo.y() + detail::uniform01(volume.seed, i, detail::kStreamPosY) *
                     (hi.y() - lo.y()),
        lo.z() + detail::uniform01(volume.seed, i, detail::kStreamPosZ) *
                     (hi.z() - lo.z()));
    const Eigen::Vector3d moved = initial + d.velocity * time_s;
    d.position = {detail::wrap_into(moved.x(), lo.x(), hi.x()),
                  detail::wrap_into(moved.y(), lo.y(), hi.y()),
                  detail::wrap_into(moved.z(), lo.z(), hi.z())};
    drops.push_back(d);
  }
  return drops;
}

/// Ballistic update with torus wrap-around; velocity, diameter, and id are
/// untouched.
inline Raindrop advance(const Raindrop& drop, double dt,
                        const RainVolume& volume) {
  Raindrop out = drop;
  const Eigen::Vector3d moved = drop.position + drop.velocity * dt;
  out.position = {
      detail::wrap_into(moved.x(), volume.min_corner.x(), volume.max_corner.x()),
      detail::wrap_into(moved.y(), volume.min_corner.y(), volume.max_corner.y()),
      detail::wrap_into(moved.z(), volume.min_corner.z(),
                        volume.max_corner.z())};
  return out;
}

/// Bounding volume for a camera rig: covers every camera center, extends
/// max_depth along each viewing direction, and pads all sides by margin.
inline RainVolume volume_from_cameras(const std::vector<Camera>& cameras,
                                      double max_depth, double margin,
                                      std::uint64_t seed) {
  if (cameras.empty()) throw EmptyCameraSetError("no cameras for rain volume");
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(
      std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  for (const Camera& cam : cameras) {
    const Eigen::Vector3d c = cam.pose.center();
    const Eigen::Vector3d reach = c + view_direction(cam.pose) * max_depth;
    lo = lo.cwiseMin(c).cwiseMin(reach);
    hi = hi.cwiseMax(c).cwiseMax(reach);
  }
  RainVolume vol;
  vol.min_corner = lo - Eigen::Vector3d::Constant(margin);
  vol.max_corner = hi + Eigen::Vector3d::Constant(margin);
  vol.seed = seed;
  if (!(vol.min_corner.array() < vol.max_corner.array()).all())
    throw ParamOutOfRangeError(
        "rain volume is degenerate; use a positive margin");
  return vol;
}

}  // namespace rainsynth
