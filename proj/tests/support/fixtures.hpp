// Synthetic camera rigs and on-disk scene fixtures shared by the test and
// acceptance suites.

#pragma once

#include <unistd.h>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "rainsynth/colmap.hpp"
#include "rainsynth/config.hpp"
#include "rainsynth/geometry.hpp"
#include "rainsynth/photometric.hpp"
#include "rainsynth/png_io.hpp"

namespace fixtures {

namespace fs = std::filesystem;

/// Unique scratch directory, removed on destruction.
class TempDir {
public:
  TempDir() {
    static std::atomic<std::uint64_t> counter{0};
    path_ = fs::temp_directory_path() /
            ("rainsynth-test-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter.fetch_add(1)));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }

private:
  fs::path path_;
};

/// World-to-camera pose for a camera at `center` pitched by `elevation_rad`
/// (positive looks up for the default up (0,-1,0)) and yawed about the up
/// axis by `yaw_rad`.
inline rainsynth::Pose make_pose(const Eigen::Vector3d& center,
                                 double elevation_rad, double yaw_rad = 0.0) {
  const Eigen::AngleAxisd pitch(elevation_rad, Eigen::Vector3d::UnitX());
  const Eigen::AngleAxisd yaw(yaw_rad, Eigen::Vector3d(0.0, -1.0, 0.0));
  const Eigen::Quaterniond cam_to_world = yaw * pitch;
  rainsynth::Pose pose;
  pose.rotation = cam_to_world.conjugate();
  pose.translation = -(pose.rotation * center);
  return pose;
}

struct RigView {
  Eigen::Vector3d center;
  double elevation_rad;
  double yaw_rad = 0.0;
};

struct Rig {
  std::vector<rainsynth::ColmapCameraRecord> cameras;
  std::vector<rainsynth::ColmapImageRecord> images;
};

inline Rig make_rig(const std::vector<RigView>& views, int width, int height,
                    double focal) {
  Rig rig;
  rainsynth::ColmapCameraRecord cam;
  cam.camera_id = 1;
  cam.model_name = "PINHOLE";
  cam.width = static_cast<std::uint64_t>(width);
  cam.height = static_cast<std::uint64_t>(height);
  cam.params = {focal, focal, width / 2.0, height / 2.0};
  rig.cameras.push_back(cam);
  for (std::size_t i = 0; i < views.size(); ++i) {
    const rainsynth::Pose pose =
        make_pose(views[i].center, views[i].elevation_rad, views[i].yaw_rad);
    rainsynth::ColmapImageRecord img;
    img.image_id = static_cast<std::int32_t>(i + 1);
    img.qvec = pose.rotation;
    img.tvec = pose.translation;
    img.camera_id = 1;
    img.name = "view" + std::to_string(i) + ".png";
    rig.images.push_back(img);
  }
  return rig;
}

/// Deterministic mid-tone background with smooth structure plus hash noise.
inline rainsynth::ImageBuffer make_background(int width, int height,
                                              std::uint64_t seed) {
  rainsynth::ImageBuffer img = rainsynth::ImageBuffer::filled(width, height, 0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      std::uint64_t h = seed * 0x9E3779B97F4A7C15ULL +
                        (std::uint64_t(y) * width + x) * 0xBF58476D1CE4E5B9ULL;
      h ^= h >> 31;
      h *= 0x94D049BB133111EBULL;
      h ^= h >> 29;
      const double noise = (h >> 11) * 0x1.0p-53;
      const double gx = static_cast<double>(x) / width;
      const double gy = static_cast<double>(y) / height;
      img.at(x, y, 0) = 0.25 + 0.4 * gx + 0.1 * noise;
      img.at(x, y, 1) = 0.30 + 0.3 * gy + 0.1 * noise;
      img.at(x, y, 2) = 0.35 + 0.2 * (1.0 - gx) + 0.1 * noise;
    }
  }
  return img;
}

/// Writes a COLMAP text reconstruction plus matching backgrounds and returns
/// a ready-to-run config. Layout: <root>/colmap, <root>/backgrounds,
/// <root>/out (not created).
inline rainsynth::JobConfig write_scene_fixture(const fs::path& root,
                                                const Rig& rig,
                                                std::uint64_t seed) {
  fs::create_directories(root / "colmap");
  fs::create_directories(root / "backgrounds");
  {
    std::ofstream cams(root / "colmap" / "cameras.txt");
    rainsynth::serialize_cameras_text(rig.cameras, cams);
    std::ofstream imgs(root / "colmap" / "images.txt");
    rainsynth::serialize_images_text(rig.images, imgs);
  }
  for (const auto& img : rig.images) {
    const auto& cam = rig.cameras.front();
    rainsynth::write_png(root / "backgrounds" / img.name,
                         make_background(static_cast<int>(cam.width),
                                         static_cast<int>(cam.height),
                                         seed + img.image_id),
                         8);
  }
  rainsynth::JobConfig cfg;
  cfg.scene_name = "fixture";
  cfg.colmap_dir = root / "colmap";
  cfg.background_dir = root / "backgrounds";
  cfg.output_dir = root / "out";
  cfg.seed = seed;
  return cfg;
}

/// The bundled 3-camera rig used by the synthesize acceptance checks:
/// slightly pitched views with lateral baseline so the frusta overlap.
inline Rig acceptance_rig() {
  const double deg = std::numbers::pi / 180.0;
  return make_rig(
      {
          {{0.0, 0.0, 0.0}, 8.0 * deg, 0.0},
          {{0.45, 0.05, -0.2}, 0.0, 3.0 * deg},
          {{-0.4, -0.05, -0.35}, -8.0 * deg, -3.0 * deg},
      },
      160, 120, 130.0);
}

/// Scene fixture with rain knobs tuned for the small rig: dense enough for
/// streak statistics, attenuation scaled to the preset densities so the
/// light/moderate/heavy brightness ordering has real margins.
inline rainsynth::JobConfig acceptance_config(const fs::path& root,
                                              std::uint64_t seed = 424242) {
  rainsynth::JobConfig cfg = write_scene_fixture(root, acceptance_rig(), seed);
  cfg.rain.density = 2.0;
  cfg.rain.max_depth = 8.0;
  cfg.volume_margin = 1.0;
  cfg.gamma = 0.05;  // presets run at 2/6/12 drops per m^3
  cfg.frame_times = {0.0, 0.4};
  return cfg;
}

}  // namespace fixtures
