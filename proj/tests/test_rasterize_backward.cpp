// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "fieldsplat/rasterize_backward.hpp"
#include "raster_fd.hpp"

namespace fieldsplat {
namespace {

TEST(RasterizeBackward, ZeroGradImageGivesZeroGradients) {
  SplatScene scene = test::random_raster_scene(1, 4);
  const Camera cam = test::raster_fd_camera();
  const Image zero(cam.height, cam.width, 3, 0.0);
  SplatGradients grads;
  rasterize_backward(scene, cam, zero, grads);
  for (size_t i = 0; i < scene.splats.size(); ++i) {
    EXPECT_EQ(grads.position[i], Vec3::Zero());
    EXPECT_EQ(grads.log_scale[i], Vec3::Zero());
    EXPECT_EQ(grads.opacity_logit[i], 0.0);
    for (double g : grads.sh[i]) EXPECT_EQ(g, 0.0);
  }
  for (double g : grads.background) EXPECT_EQ(g, 0.0);
}

TEST(RasterizeBackward, ShapeMismatchRejected) {
  SplatScene scene = test::random_raster_scene(2, 1);
  const Camera cam = test::raster_fd_camera();
  SplatGradients grads;
  const Image wrong(4, 4, 3, 0.0);
  EXPECT_THROW(rasterize_backward(scene, cam, wrong, grads), Error);
}

TEST(RasterizeBackward, MatchesFiniteDifferences) {
  for (uint64_t seed = 10; seed < 20; ++seed) {
    SplatScene scene = test::random_raster_scene(seed, 1 + static_cast<int>(seed % 5));
    const Camera cam = test::raster_fd_camera();
    const auto stats = test::check_raster_gradients(scene, cam, seed * 31, 1e-3);
    EXPECT_GT(stats.checked, 0);
  }
}

// Directional derivative over all parameters at once.
TEST(RasterizeBackward, DirectionalDerivativeConsistency) {
  for (uint64_t seed = 40; seed < 45; ++seed) {
    SplatScene scene = test::random_raster_scene(seed, 3);
    const Camera cam = test::raster_fd_camera();
    const Image mask = test::safe_pixel_mask(scene, cam);
    const Image grad_rgb = test::masked_random_grad(mask, seed + 7);
    SplatGradients grads;
    rasterize_backward(scene, cam, grad_rgb, grads);

    SeededRng rng(seed + 100);
    std::vector<double> dir;
    auto push = [&](size_t n) {
      for (size_t i = 0; i < n; ++i) dir.push_back(rng.next_unit() - 0.5);
    };
    push(scene.splats.size() * (3 + 3 + 4 + 1 + kShTotal) + kShTotal);

    double analytic = 0.0;
    size_t cursor = 0;
    auto take = [&]() { return dir[cursor++]; };
    auto apply = [&](SplatScene& target, double eps) {
      size_t c = 0;
      auto get = [&]() { return dir[c++]; };
      for (Splat& s : target.splats) {
        for (int a = 0; a < 3; ++a) s.position[a] += eps * get();
        for (int a = 0; a < 3; ++a) s.log_scale[a] += eps * get();
        s.rotation.w += eps * get();
        s.rotation.x += eps * get();
        s.rotation.y += eps * get();
        s.rotation.z += eps * get();
        s.opacity_logit += eps * get();
        for (int k = 0; k < kShTotal; ++k) s.sh[k] += eps * get();
      }
      for (int k = 0; k < kShTotal; ++k) target.background[k] += eps * get();
    };
    for (size_t i = 0; i < scene.splats.size(); ++i) {
      for (int a = 0; a < 3; ++a) analytic += grads.position[i][a] * take();
      for (int a = 0; a < 3; ++a) analytic += grads.log_scale[i][a] * take();
      for (int a = 0; a < 4; ++a) analytic += grads.rotation[i][a] * take();
      analytic += grads.opacity_logit[i] * take();
      for (int k = 0; k < kShTotal; ++k) analytic += grads.sh[i][k] * take();
    }
    for (int k = 0; k < kShTotal; ++k) analytic += grads.background[k] * take();

    const double eps = 1e-4;
    SplatScene plus = scene, minus = scene;
    apply(plus, eps);
    apply(minus, -eps);
    const double fd = (test::linear_loss(plus, cam, grad_rgb) -
                       test::linear_loss(minus, cam, grad_rgb)) /
                      (2.0 * eps);
    EXPECT_LE(test::rel_error(analytic, fd, 1e-8), 1e-3)
        << "analytic " << analytic << " fd " << fd;
  }
}

// A splat entirely behind an opaque front splat gets exactly zero gradients.
TEST(RasterizeBackward, FullyOccludedSplatHasZeroGradient) {
  SplatScene scene;
  Splat front;
  front.position = Vec3(0, 0, -1.0);
  front.log_scale = Vec3::Constant(std::log(0.8));
  front.opacity_logit = 15.0;  // alpha clamps to 0.999 across the image
  front.sh = constant_color_sh(0.9, 0.4, 0.2);
  Splat back = front;
  back.position = Vec3(0, 0, -3.0);
  back.log_scale = Vec3::Constant(std::log(0.1));
  back.opacity_logit = logit(0.8);
  scene.splats.push_back(front);
  scene.splats.push_back(back);

  const Camera cam = test::raster_fd_camera();
  // Transmittance after two front hits: (1 - 0.999)^2 = 1e-6 < 1e-4, and even
  // one hit leaves 1e-3; stack a second opaque layer to pass the stop.
  Splat mid = front;
  mid.position = Vec3(0, 0, -1.5);
  scene.splats.push_back(mid);

  Image grad(cam.height, cam.width, 3, 1.0);
  SplatGradients grads;
  rasterize_backward(scene, cam, grad, grads);
  EXPECT_EQ(grads.position[1], Vec3::Zero());
  EXPECT_EQ(grads.log_scale[1], Vec3::Zero());
  EXPECT_EQ(grads.opacity_logit[1], 0.0);
  for (double g : grads.sh[1]) EXPECT_EQ(g, 0.0);
  // The front splats do receive gradients.
  EXPECT_NE(grads.opacity_logit[0], 0.0);
}

}  // namespace
}  // namespace fieldsplat
