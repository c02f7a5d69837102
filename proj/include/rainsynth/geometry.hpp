#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "rainsynth/errors.hpp"

namespace rainsynth {

/// Pinhole intrinsics, pixels. No distortion model.
struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  bool valid() const {
    return fx > 0.0 && fy > 0.0 && width > 0 && height > 0 && cx >= 0.0 &&
           cx < width && cy >= 0.0 && cy < height;
  }
};

/// World-to-camera rigid transform, COLMAP convention:
/// camera x right, y down, z forward. x_cam = R * x_world + t.
struct Pose {
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Matrix3d rotation_matrix() const { return rotation.toRotationMatrix(); }

  /// Camera center in world coordinates: -R^T t.
  Eigen::Vector3d center() const {
    return -(rotation.toRotationMatrix().transpose() * translation);
  }
};

/// Elevation is the angle of the optical axis above the horizontal plane
/// (positive looking up). Azimuth lies in (-pi, pi], measured in the
/// horizontal plane against the reference axis for the configured up vector.
struct ViewAngles {
  double elevation = 0.0;
  double azimuth = 0.0;
  /// Set when the view direction is within 1e-9 of parallel to up;
  /// azimuth is reported as 0 in that case.
  bool degenerate_azimuth = false;
};

struct Camera {
  Intrinsics intrinsics;
  Pose pose;
  ViewAngles angles;
  std::int32_t view_id = 0;
  std::string name;
};

struct Projection {
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
  double depth = 0.0;
};

/// Projects a world point. Empty when the point is at or behind the camera
/// plane (z_cam <= 0). The pixel may lie outside the image bounds.
inline std::optional<Projection> project(const Eigen::Vector3d& point_world,
                                         const Camera& camera) {
  const Eigen::Vector3d p =
      camera.pose.rotation * point_world + camera.pose.translation;
  if (p.z() <= 0.0) return std::nullopt;
  const Intrinsics& k = camera.intrinsics;
  Projection out;
  out.pixel = {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy};
  out.depth = p.z();
  return out;
}

/// Inverse of project: lifts (pixel, depth) back to a world point.
inline Eigen::Vector3d backproject(const Eigen::Vector2d& pixel, double depth,
                                   const Camera& camera) {
  const Intrinsics& k = camera.intrinsics;
  const Eigen::Vector3d p_cam((pixel.x() - k.cx) / k.fx * depth,
                              (pixel.y() - k.cy) / k.fy * depth, depth);
  return camera.pose.rotation.conjugate() * (p_cam - camera.pose.translation);
}

/// Optical axis of the camera expressed in world coordinates: R^T (0,0,1).
inline Eigen::Vector3d view_direction(const Pose& pose) {
  return pose.rotation.conjugate() * Eigen::Vector3d::UnitZ();
}

/// Right-handed horizontal basis for a given up vector. The reference axis is
/// the world axis most orthogonal to up (later index wins ties, which puts the
/// reference at +z for the default up (0,-1,0)); the binormal is up x ref.
struct HorizontalFrame {
  Eigen::Vector3d reference;
  Eigen::Vector3d binormal;
};

inline HorizontalFrame horizontal_frame(const Eigen::Vector3d& up) {
  int best = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(up[i]) <= std::abs(up[best])) best = i;
  }
  Eigen::Vector3d axis = Eigen::Vector3d::Zero();
  axis[best] = 1.0;
  Eigen::Vector3d ref = axis - up.dot(axis) * up;
  ref.normalize();
  return {ref, up.cross(ref)};
}

/// Elevation/azimuth of the optical axis relative to an up vector (|up| = 1).
/// Looking straight along +/-up leaves the azimuth undefined; it is reported
/// as 0 with the degenerate flag set.
inline ViewAngles view_angles(const Pose& pose, const Eigen::Vector3d& up) {
  const Eigen::Vector3d d = view_direction(pose);
  const double s = std::clamp(d.dot(up), -1.0, 1.0);
  ViewAngles out;
  out.elevation = std::asin(s);
  if (std::abs(s) > 1.0 - 1e-9) {
    out.degenerate_azimuth = true;
    out.azimuth = 0.0;
    return out;
  }
  const HorizontalFrame frame = horizontal_frame(up);
  const Eigen::Vector3d h = d - s * up;
  out.azimuth = std::atan2(h.dot(frame.binormal), h.dot(frame.reference));
  return out;
}

/// True iff the point projects inside the image with near <= depth <= far.
inline bool frustum_contains(const Eigen::Vector3d& point_world,
                             const Camera& camera, double near, double far) {
  const auto proj = project(point_world, camera);
  if (!proj) return false;
  if (proj->depth < near || proj->depth > far) return false;
  const Eigen::Vector2d& px = proj->pixel;
  return px.x() >= 0.0 && px.x() < camera.intrinsics.width && px.y() >= 0.0 &&
         px.y() < camera.intrinsics.height;
}

/// Builds a camera whose angles are derived from the pose and up vector, so
/// the angle/pose coupling invariant holds by construction.
inline Camera make_camera(const Intrinsics& intrinsics, const Pose& pose,
                          const Eigen::Vector3d& up, std::int32_t view_id = 0,
                          std::string name = {}) {
  Camera cam;
  cam.intrinsics = intrinsics;
  cam.pose = pose;
  cam.angles = view_angles(pose, up);
  cam.view_id = view_id;
  cam.name = std::move(name);
  return cam;
}

}  // namespace rainsynth
