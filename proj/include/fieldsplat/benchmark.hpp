// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "fieldsplat/analytic_scene.hpp"
#include "fieldsplat/trajectory.hpp"

namespace fieldsplat {

// Default benchmark: three disjoint opaque spheres with distinct base colors
// (one with a view-dependent tint) inside a 2 m box, under a vertical sky
// gradient. Cameras walk past the spheres on one side; the hard validation
// split walks back on the other side.
struct BenchmarkScene {
  AnalyticScene scene;
  TrajectorySpec train;
  TrajectorySpec val_similar;
  TrajectorySpec val_opposite;
};

inline SHCoeffs constant_color_sh(double r, double g, double b) {
  SHCoeffs c = zero_sh();
  c[0] = (r - 0.5) / shc::k0;
  c[16] = (g - 0.5) / shc::k0;
  c[32] = (b - 0.5) / shc::k0;
  return c;
}

inline BenchmarkScene three_spheres_benchmark(int image_size = 128) {
  BenchmarkScene b;
  b.scene.bbox_min = Vec3(-1, -1, -1);
  b.scene.bbox_max = Vec3(1, 1, 1);

  SHCoeffs red = constant_color_sh(0.85, 0.25, 0.20);
  SHCoeffs green = constant_color_sh(0.20, 0.75, 0.30);
  // +x viewing tint on the red channel of the green sphere.
  green[3] = 0.35;
  SHCoeffs blue = constant_color_sh(0.25, 0.35, 0.85);

  b.scene.primitives.push_back(Primitive::sphere(Vec3(-0.62, 0.34, 0.02), 0.28, 60.0, red));
  b.scene.primitives.push_back(Primitive::sphere(Vec3(0.05, -0.36, 0.12), 0.30, 60.0, green));
  b.scene.primitives.push_back(Primitive::sphere(Vec3(0.68, 0.30, -0.06), 0.26, 60.0, blue));

  // Vertical sky gradient: darker blue up top, brighter toward the ground.
  SHCoeffs sky = zero_sh();
  sky[0] = (0.55 - 0.5) / shc::k0;
  sky[16] = (0.65 - 0.5) / shc::k0;
  sky[32] = (0.80 - 0.5) / shc::k0;
  sky[2] = -0.30 / shc::k1;
  sky[18] = -0.20 / shc::k1;
  sky[34] = -0.05 / shc::k1;
  b.scene.background = sky;

  Intrinsics in;
  in.width = image_size;
  in.height = image_size;
  in.fl_x = in.fl_y = 84.0 * image_size / 128.0;
  in.cx = in.cy = image_size / 2.0;

  TrajectorySpec train;
  train.kind = TrajectorySpec::Kind::kCorridor;
  train.count = 20;
  train.intrinsics = in;
  train.start = Vec3(-2.7, 0.0, 0.30);
  train.end = Vec3(1.9, 0.0, 0.30);
  b.train = train;

  b.val_similar = train;
  b.val_similar.count = 8;

  TrajectorySpec opp = train;
  opp.kind = TrajectorySpec::Kind::kOppositeSide;
  opp.count = 8;
  opp.lateral_offset = 0.8;
  b.val_opposite = opp;
  return b;
}

}  // namespace fieldsplat
