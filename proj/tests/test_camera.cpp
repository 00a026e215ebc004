// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "fieldsplat/camera.hpp"

namespace fieldsplat {
namespace {

Camera identity_camera() { return Camera(100.0, 100.0, 64.0, 64.0, 128, 128); }

TEST(PixelRay, PrincipalPointLooksAlongNegativeZ) {
  const Camera cam = identity_camera();
  const Ray ray = pixel_ray(cam, cam.cx, cam.cy);
  EXPECT_NEAR(ray.dir.x(), 0.0, 1e-15);
  EXPECT_NEAR(ray.dir.y(), 0.0, 1e-15);
  EXPECT_NEAR(ray.dir.z(), -1.0, 1e-15);
  EXPECT_NEAR(ray.origin.norm(), 0.0, 1e-15);
}

TEST(PixelRay, OneFocalLengthOffsetGivesFortyFiveDegrees) {
  const Camera cam(60.0, 60.0, 64.0, 64.0, 128, 128);
  const Ray ray = pixel_ray(cam, cam.cx + cam.fx, cam.cy);
  const Vec3 expected = Vec3(1.0, 0.0, -1.0).normalized();
  EXPECT_LT((ray.dir.vec() - expected).norm(), 1e-15);
}

TEST(PixelRay, OutOfImageRejected) {
  const Camera cam = identity_camera();
  EXPECT_THROW(pixel_ray(cam, -0.5, 10.0), Error);
  EXPECT_THROW(pixel_ray(cam, 10.0, 128.5), Error);
  EXPECT_NO_THROW(pixel_ray(cam, 0.0, 128.0));  // closed bounds
}

// Corner rays span exactly the field of view implied by the intrinsics.
TEST(PixelRay, CornersSpanTheFov) {
  const Camera cam(90.0, 120.0, 50.0, 70.0, 128, 160);
  const Ray tl = pixel_ray(cam, 0.0, 0.0);
  const double ax = std::atan(std::abs(tl.dir.x() / tl.dir.z()));
  const double ay = std::atan(std::abs(tl.dir.y() / tl.dir.z()));
  EXPECT_NEAR(ax, std::atan(cam.cx / cam.fx), 1e-9);
  EXPECT_NEAR(ay, std::atan(cam.cy / cam.fy), 1e-9);
  const Ray br = pixel_ray(cam, cam.width, cam.height);
  EXPECT_NEAR(std::atan(std::abs(br.dir.x() / br.dir.z())),
              std::atan((cam.width - cam.cx) / cam.fx), 1e-9);
  EXPECT_NEAR(std::atan(std::abs(br.dir.y() / br.dir.z())),
              std::atan((cam.height - cam.cy) / cam.fy), 1e-9);
}

TEST(PixelRay, PoseRotatesAndTranslatesRays) {
  Mat4 pose = Mat4::Identity();
  // 90 degrees about +x: camera -z maps to world -y... check numerically.
  pose.block<3, 3>(0, 0) = Eigen::AngleAxisd(M_PI / 2.0, Vec3::UnitX()).toRotationMatrix();
  pose.block<3, 1>(0, 3) = Vec3(1.0, 2.0, 3.0);
  const Camera cam(100.0, 100.0, 64.0, 64.0, 128, 128, pose);
  const Ray ray = pixel_ray(cam, cam.cx, cam.cy);
  EXPECT_LT((ray.origin - Vec3(1.0, 2.0, 3.0)).norm(), 1e-15);
  EXPECT_LT((ray.dir.vec() - Vec3(0.0, 1.0, 0.0)).norm(), 1e-12);
}

TEST(Camera, InvariantsEnforced) {
  EXPECT_THROW(Camera(0.0, 100.0, 64.0, 64.0, 128, 128), Error);
  EXPECT_THROW(Camera(100.0, 100.0, 128.0, 64.0, 128, 128), Error);
  Mat4 bad = Mat4::Identity();
  bad(0, 0) = 2.0;
  EXPECT_THROW(Camera(100.0, 100.0, 64.0, 64.0, 128, 128, bad), Error);
  Mat4 mirrored = Mat4::Identity();
  mirrored(0, 0) = -1.0;  // det -1
  EXPECT_THROW(Camera(100.0, 100.0, 64.0, 64.0, 128, 128, mirrored), Error);
}

TEST(Ray, BoundsValidated) {
  EXPECT_THROW(Ray(Vec3::Zero(), Direction(0, 0, -1), 1.0, 1.0), Error);
  EXPECT_THROW(Ray(Vec3::Zero(), Direction(0, 0, -1), -0.5, 1.0), Error);
  EXPECT_THROW(Ray(Vec3::Zero(), Direction(0, 0, -1), 0.0,
                   std::numeric_limits<double>::infinity()),
               Error);
}

}  // namespace
}  // namespace fieldsplat
