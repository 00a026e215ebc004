// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>

#include "fieldsplat/error.hpp"
#include "fieldsplat/geometry.hpp"

namespace fieldsplat {

// Pinhole camera. The camera frame is right-handed with +x right, +y up and
// the view direction along -z (the transforms-JSON convention); pose maps
// camera coordinates to world coordinates.
struct Camera {
  double fx = 0.0, fy = 0.0;
  double cx = 0.0, cy = 0.0;
  int width = 0, height = 0;
  Mat4 pose = Mat4::Identity();  // world-from-camera

  Camera() = default;
  Camera(double fx_, double fy_, double cx_, double cy_, int width_, int height_,
         const Mat4& pose_ = Mat4::Identity())
      : fx(fx_), fy(fy_), cx(cx_), cy(cy_), width(width_), height(height_), pose(pose_) {
    validate();
  }

  void validate() const {
    if (width <= 0 || height <= 0 || !(fx > 0.0) || !(fy > 0.0)) {
      throw Error(errc::kInvalidArgument, "camera needs positive focal lengths and dimensions");
    }
    if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
      throw Error(errc::kInvalidArgument, "principal point outside image");
    }
    const Mat3 r = rotation();
    if ((r * r.transpose() - Mat3::Identity()).norm() > 1e-6 ||
        std::abs(r.determinant() - 1.0) > 1e-6) {
      throw Error(errc::kInvalidArgument, "pose rotation is not special orthogonal");
    }
    if (std::abs(pose(3, 0)) + std::abs(pose(3, 1)) + std::abs(pose(3, 2)) > 0.0 ||
        pose(3, 3) != 1.0) {
      throw Error(errc::kInvalidArgument, "pose is not a rigid transform");
    }
  }

  Mat3 rotation() const { return pose.block<3, 3>(0, 0); }
  Vec3 center() const { return pose.block<3, 1>(0, 3); }

  // Camera-from-world rotation and translation (rigid inverse of pose).
  Mat3 world_to_cam_rotation() const { return rotation().transpose(); }
  Vec3 world_to_cam_translation() const { return -rotation().transpose() * center(); }
};

struct Ray {
  Vec3 origin = Vec3::Zero();
  Direction dir{0.0, 0.0, -1.0};
  double t_near = 0.0;
  double t_far = 0.0;

  Ray(const Vec3& origin_, const Direction& dir_, double t_near_, double t_far_)
      : origin(origin_), dir(dir_), t_near(t_near_), t_far(t_far_) {
    if (!(t_near >= 0.0) || !(t_near < t_far) || !std::isfinite(t_far)) {
      throw Error(errc::kDegenerateRay, "ray bounds must satisfy 0 <= t_near < t_far < inf");
    }
  }

  Vec3 at(double t) const { return origin + t * dir.vec(); }
};

inline constexpr double kDefaultRayFar = 1.0e6;

// Ray through continuous pixel coordinate (px, py). Integer pixel p is
// sampled at its center by passing p + 0.5.
inline Ray pixel_ray(const Camera& cam, double px, double py, double t_near = 0.0,
                     double t_far = kDefaultRayFar) {
  if (!(px >= 0.0 && px <= cam.width && py >= 0.0 && py <= cam.height)) {
    throw Error(errc::kOutOfImage, "pixel coordinate outside image bounds");
  }
  const Vec3 dir_cam((px - cam.cx) / cam.fx, -(py - cam.cy) / cam.fy, -1.0);
  const Vec3 dir_world = cam.rotation() * dir_cam;
  return Ray(cam.center(), Direction(dir_world), t_near, t_far);
}

}  // namespace fieldsplat
