#include "rainsynth/streak_raster.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>
#include <random>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace rainsynth;

namespace {

constexpr double kPi = std::numbers::pi;
const Eigen::Vector3d kUp(0.0, -1.0, 0.0);

Camera test_camera(double elevation_rad,
                   const Eigen::Vector3d& center = {0, 0, 0}) {
  Intrinsics k;
  k.fx = k.fy = 240.0;
  k.cx = 160.0;
  k.cy = 120.0;
  k.width = 320;
  k.height = 240;
  return make_camera(k, fixtures::make_pose(center, elevation_rad), kUp, 1,
                     "t");
}

RainVolume frustum_box(std::uint64_t seed) {
  RainVolume vol;
  vol.min_corner = {-6, -6, -1};
  vol.max_corner = {6, 6, 9};
  vol.seed = seed;
  return vol;
}

oracle::PinholeOracle to_oracle(const Camera& cam) {
  oracle::PinholeOracle o;
  const Eigen::Quaterniond& q = cam.pose.rotation;
  o.rotation = oracle::quat_to_matrix(q.w(), q.x(), q.y(), q.z());
  o.translation = {cam.pose.translation.x(), cam.pose.translation.y(),
                   cam.pose.translation.z()};
  o.fx = cam.intrinsics.fx;
  o.fy = cam.intrinsics.fy;
  o.cx = cam.intrinsics.cx;
  o.cy = cam.intrinsics.cy;
  return o;
}

Raindrop drop_at(const Eigen::Vector3d& pos, const Eigen::Vector3d& vel,
                 double diameter_mm = 1.0) {
  Raindrop d;
  d.drop_id = 0;
  d.position = pos;
  d.velocity = vel;
  d.diameter_mm = diameter_mm;
  return d;
}

TEST(StreakForDrop, AxialDropMakesVerticalStreak) {
  const Camera cam = test_camera(0.0);
  const auto s = streak_for_drop(drop_at({0, -0.5, 3.0}, {0, 4.0, 0}), cam,
                                 1.0 / 60.0, 0.1, 20.0);
  ASSERT_TRUE(s.has_value());
  EXPECT_LT(std::abs(s->p0.x() - s->p1.x()), 1e-6);
  EXPECT_DOUBLE_EQ(s->p0.x(), 160.0);  // principal column
  EXPECT_GT(s->p1.y(), s->p0.y());     // falls downward in the image
}

TEST(StreakForDrop, VanishingExposureCollapsesToPoint) {
  const Camera cam = test_camera(0.0);
  const auto s = streak_for_drop(drop_at({0.4, 0.1, 2.0}, {1.0, 4.0, 0.5}),
                                 cam, 1e-12, 0.1, 20.0);
  ASSERT_TRUE(s.has_value());
  EXPECT_LT(s->length_px(), 1e-6);
  EXPECT_LT((s->mid_px - s->p0).norm(), 1e-6);
}

TEST(StreakForDrop, DepthCulls) {
  const Camera cam = test_camera(0.0);
  // beyond the far plane
  EXPECT_FALSE(streak_for_drop(drop_at({0, 0, 25.0}, {0, 4, 0}), cam,
                               1.0 / 60.0, 0.1, 20.0)
                   .has_value());
  // closer than near
  EXPECT_FALSE(streak_for_drop(drop_at({0, 0, 0.05}, {0, 4, 0}), cam,
                               1.0 / 60.0, 0.1, 20.0)
                   .has_value());
  // behind the camera
  EXPECT_FALSE(streak_for_drop(drop_at({0, 0, -2.0}, {0, 4, 0}), cam,
                               1.0 / 60.0, 0.1, 20.0)
                   .has_value());
  // far off to the side
  EXPECT_FALSE(streak_for_drop(drop_at({50.0, 0, 3.0}, {0, 4, 0}), cam,
                               1.0 / 60.0, 0.1, 20.0)
                   .has_value());
}

TEST(StreakForDrop, WidthAndIntensityModel) {
  const Camera cam = test_camera(0.0);
  const auto s = streak_for_drop(drop_at({0, 0, 4.0}, {0, 4.0, 0}, 2.0), cam,
                                 1.0 / 60.0, 0.1, 20.0);
  ASSERT_TRUE(s.has_value());
  // width = fx * diameter / depth = 240 * 0.002 / 4 = 0.12 -> clamped to 0.5
  EXPECT_DOUBLE_EQ(s->width_px, 0.5);
  // length = fy * v * exposure / z = 240 * 4 / 60 / 4 = 4 px; the length
  // factor saturates (0.5 * 20 / 4 > 1), leaving the depth falloff alone:
  // 0.8 / (1 + 4/20) = 2/3.
  EXPECT_NEAR(s->length_px(), 4.0, 1e-9);
  EXPECT_NEAR(s->intensity, 0.8 / 1.2, 1e-12);
  // A slower drop at the same depth makes a shorter, brighter-per-pixel
  // streak; a longer streak spreads the same light thinner.
  const auto fast = streak_for_drop(drop_at({0, 0, 1.0}, {0, 4.0, 0}, 2.0),
                                    cam, 1.0 / 60.0, 0.1, 20.0);
  ASSERT_TRUE(fast.has_value());
  EXPECT_NEAR(fast->length_px(), 16.0, 1e-9);
  EXPECT_NEAR(fast->intensity, 0.8 * (0.5 * 20.0 / 16.0) / 1.05, 1e-12);
  EXPECT_LE(fast->intensity, 1.0);
}

TEST(Rasterize, EmptyListGivesZeroMask) {
  const RainMask mask = rasterize({}, 64, 48);
  EXPECT_EQ(mask.width, 64);
  EXPECT_EQ(mask.height, 48);
  for (double v : mask.values) EXPECT_EQ(v, 0.0);
}

TEST(Rasterize, CenterlinePeakMatchesGaussianOracle) {
  Streak s;
  s.p0 = {10.0, 20.5};  // centerline passes through row-20 pixel centers
  s.p1 = {50.0, 20.5};
  s.width_px = 2.0;
  s.intensity = 0.5;
  const RainMask mask = rasterize({s}, 64, 48);
  double max_v = 0.0;
  int max_y = -1;
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 64; ++x)
      if (mask.at(x, y) > max_v) {
        max_v = mask.at(x, y);
        max_y = y;
      }
  EXPECT_GE(max_v, 0.45);
  EXPECT_LE(max_v, 0.5);
  EXPECT_EQ(max_y, 20);
  // Distance-0 pixels carry exactly the streak intensity.
  EXPECT_DOUBLE_EQ(mask.at(30, 20), 0.5);
  // A pixel 2 px off the centerline sees exp(-2) of the peak (sigma = 1).
  EXPECT_NEAR(mask.at(30, 22), 0.5 * std::exp(-2.0), 1e-12);
  // Beyond 3 sigma nothing arrives.
  EXPECT_EQ(mask.at(30, 28), 0.0);
}

TEST(Rasterize, CoincidentStreaksSaturate) {
  Streak s;
  s.p0 = {5.0, 10.5};
  s.p1 = {25.0, 10.5};
  s.width_px = 2.0;
  s.intensity = 0.7;
  const RainMask mask = rasterize({s, s}, 32, 20);
  EXPECT_DOUBLE_EQ(mask.at(15, 10), 1.0);  // 1.4 clamped
  for (double v : mask.values) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Rasterize, PermutationInvariantUpToAssociativity) {
  oracle::TestRng rng(5);
  std::vector<Streak> streaks;
  for (int i = 0; i < 40; ++i) {
    Streak s;
    s.p0 = {rng.uniform(0, 64), rng.uniform(0, 48)};
    s.p1 = {rng.uniform(0, 64), rng.uniform(0, 48)};
    s.width_px = rng.uniform(0.5, 3.0);
    s.intensity = rng.uniform(0.05, 0.9);
    streaks.push_back(s);
  }
  const RainMask forward = rasterize(streaks, 64, 48);
  std::vector<Streak> reversed(streaks.rbegin(), streaks.rend());
  const RainMask backward = rasterize(reversed, 64, 48);
  for (std::size_t i = 0; i < forward.values.size(); ++i)
    EXPECT_NEAR(forward.values[i], backward.values[i], 1e-12);
}

TEST(RenderView, ZeroDensityGivesZeroMask) {
  RainParams p;
  p.density = 0.0;
  p.max_depth = 8.0;
  const Camera cam = test_camera(0.0);
  const RainMask mask = render_view(p, frustum_box(1), cam, 0.0, 1.0 / 60.0,
                                    0.1, kUp);
  for (double v : mask.values) EXPECT_EQ(v, 0.0);
}

TEST(RenderView, ByteIdenticalReruns) {
  RainParams p;
  p.density = 2.0;
  p.max_depth = 8.0;
  p.wind_speed = 1.5;
  p.wind_azimuth = 0.4;
  const Camera cam = test_camera(0.2);
  const RainMask a = render_view(p, frustum_box(3), cam, 0.5, 1.0 / 60.0, 0.1,
                                 kUp);
  const RainMask b = render_view(p, frustum_box(3), cam, 0.5, 1.0 / 60.0, 0.1,
                                 kUp);
  ASSERT_EQ(a.values.size(), b.values.size());
  EXPECT_TRUE(std::equal(a.values.begin(), a.values.end(), b.values.begin()));
}

TEST(RenderView, MaskValuesStayInRange) {
  RainParams p;
  p.density = 30.0;  // crowded
  p.max_depth = 8.0;
  const Camera cam = test_camera(-0.3);
  const RainMask mask = render_view(p, frustum_box(9), cam, 0.0, 1.0 / 30.0,
                                    0.1, kUp);
  for (double v : mask.values) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

// Streak orientation statistics for one view, computed against the
// independent projection oracle. Returns {qualifying streaks, inward count,
// outward count}; "inward" means the downward-oriented streak direction
// points toward the principal column.
struct SlopeStats {
  std::size_t total = 0;
  std::size_t inward = 0;
  std::size_t outward = 0;
  double max_angle_from_vertical_deg = 0.0;
  std::size_t all_streaks = 0;
};

SlopeStats slope_stats(const Camera& cam, double density, std::uint64_t seed,
                       double exposure) {
  RainParams p;
  p.density = density;
  p.max_depth = 8.0;
  const RainVolume vol = frustum_box(seed);
  const auto drops = sample_drops(p, vol, kUp, 0.0);
  const auto ora = to_oracle(cam);
  SlopeStats stats;
  for (const Raindrop& d : drops) {
    const auto s = streak_for_drop(d, cam, exposure, 0.1, p.max_depth);
    if (!s) continue;
    // Cross-check the library endpoints against the oracle.
    const Eigen::Vector3d w1 = d.position + d.velocity * exposure;
    const auto o0 = oracle::project(ora, {d.position.x(), d.position.y(),
                                          d.position.z()});
    const auto o1 = oracle::project(ora, {w1.x(), w1.y(), w1.z()});
    EXPECT_TRUE(o0.in_front && o1.in_front);
    EXPECT_NEAR(o0.px, s->p0.x(), 1e-6);
    EXPECT_NEAR(o0.py, s->p0.y(), 1e-6);
    EXPECT_NEAR(o1.px, s->p1.x(), 1e-6);
    EXPECT_NEAR(o1.py, s->p1.y(), 1e-6);

    stats.all_streaks++;
    Eigen::Vector2d v(o1.px - o0.px, o1.py - o0.py);
    if (v.norm() > 0.0) {
      const double angle = std::atan2(std::abs(v.x()), std::abs(v.y()));
      stats.max_angle_from_vertical_deg =
          std::max(stats.max_angle_from_vertical_deg, angle * 180.0 / kPi);
    }
    if (s->length_px() <= 5.0) continue;
    if (v.y() < 0.0) v = -v;  // orient image-downward
    const double half = s->mid_px.x() - cam.intrinsics.cx;
    if (v.x() == 0.0 || half == 0.0) continue;
    stats.total++;
    if ((v.x() > 0.0) == (half > 0.0))
      stats.outward++;
    else
      stats.inward++;
  }
  return stats;
}

TEST(Perspective, LevelViewStreaksAreVertical) {
  const Camera cam = test_camera(0.0);
  const SlopeStats stats = slope_stats(cam, 5.0, 21, 1.0 / 30.0);
  ASSERT_GE(stats.all_streaks, 200u);
  EXPECT_LE(stats.max_angle_from_vertical_deg, 0.5);
}

TEST(Perspective, TopDownViewConverges) {
  const Camera cam = test_camera(-kPi / 6.0);  // looking down 30 degrees
  const SlopeStats stats = slope_stats(cam, 5.0, 22, 1.0 / 30.0);
  ASSERT_GE(stats.total, 200u);
  const double inward_fraction =
      static_cast<double>(stats.inward) / static_cast<double>(stats.total);
  EXPECT_GE(inward_fraction, 0.95);
}

TEST(Perspective, BottomUpViewDiverges) {
  const Camera cam = test_camera(kPi / 6.0);  // looking up 30 degrees
  const SlopeStats stats = slope_stats(cam, 5.0, 23, 1.0 / 30.0);
  ASSERT_GE(stats.total, 200u);
  const double outward_fraction =
      static_cast<double>(stats.outward) / static_cast<double>(stats.total);
  EXPECT_GE(outward_fraction, 0.95);
}

TEST(MultiView, SharedWorldMidpointsReproject) {
  const fixtures::Rig rig = fixtures::acceptance_rig();
  const ViewpointMatrix vm =
      build_viewpoint_matrix(rig.cameras, rig.images, kUp);
  std::vector<Camera> cams;
  for (const auto& e : vm.entries) cams.push_back(e.camera);
  RainParams p;
  p.density = 3.0;
  p.max_depth = 8.0;
  const RainVolume vol = volume_from_cameras(cams, p.max_depth, 1.0, 7);
  const auto drops = sample_drops(p, vol, kUp, 0.0);
  const double exposure = 1.0 / 60.0;
  std::size_t pairs = 0;
  for (const Raindrop& d : drops) {
    std::vector<std::pair<const Camera*, Streak>> seen;
    for (const Camera& cam : cams)
      if (auto s = streak_for_drop(d, cam, exposure, 0.1, p.max_depth))
        seen.emplace_back(&cam, *s);
    for (std::size_t a = 0; a < seen.size(); ++a) {
      for (std::size_t b = 0; b < seen.size(); ++b) {
        if (a == b) continue;
        const auto oa = to_oracle(*seen[a].first);
        const auto ob = to_oracle(*seen[b].first);
        const auto world = oracle::backproject(
            oa, seen[a].second.mid_px.x(), seen[a].second.mid_px.y(),
            seen[a].second.depth_m);
        const auto proj = oracle::project(ob, world);
        ASSERT_TRUE(proj.in_front);
        const double rx = proj.px - seen[b].second.mid_px.x();
        const double ry = proj.py - seen[b].second.mid_px.y();
        EXPECT_LT(std::sqrt(rx * rx + ry * ry), 1e-4);
        ++pairs;
      }
    }
  }
  EXPECT_GT(pairs, 50u);  // the rig actually overlaps
}

}  // namespace
