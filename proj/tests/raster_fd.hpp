// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0
//
// Shared helpers for finite-difference checks of the rasterizer backward
// pass. The loss is a fixed random linear functional of the rendered image,
// restricted to pixels whose compositing stays away from the rasterizer's
// hard gates (alpha cutoff, alpha clamp, transmittance stop), so central
// differences probe a smooth function.

#pragma once

#include <cmath>
#include <vector>

#include "fieldsplat/rasterize.hpp"
#include "fieldsplat/rasterize_backward.hpp"
#include "test_support.hpp"

namespace fieldsplat::test {

inline SplatScene random_raster_scene(uint64_t seed, int n_splats) {
  SeededRng rng(seed);
  SplatScene scene;
  for (int i = 0; i < n_splats; ++i) {
    Splat s;
    const double z = -(1.2 + 2.0 * rng.next_unit());
    s.position = Vec3(0.45 * -z * (rng.next_unit() - 0.5), 0.45 * -z * (rng.next_unit() - 0.5), z);
    for (int a = 0; a < 3; ++a) {
      s.log_scale[a] = std::log(0.08 + 0.17 * rng.next_unit());
    }
    Quaternion q{0.2 + rng.next_unit(), rng.next_unit() - 0.5, rng.next_unit() - 0.5,
                 rng.next_unit() - 0.5};
    s.rotation = q.normalized();
    s.opacity_logit = logit(0.35 + 0.55 * rng.next_unit());
    s.sh = zero_sh();
    for (int ch = 0; ch < 3; ++ch) {
      s.sh[ch * kShPerChannel] = 1.2 * (rng.next_unit() - 0.5);
      for (int k = 1; k < kShPerChannel; ++k) {
        s.sh[ch * kShPerChannel + k] = 0.04 * (rng.next_unit() - 0.5);
      }
    }
    scene.splats.push_back(s);
  }
  for (int ch = 0; ch < 3; ++ch) {
    scene.background[ch * kShPerChannel] = 0.8 * (rng.next_unit() - 0.5);
    for (int k = 1; k < kShPerChannel; ++k) {
      scene.background[ch * kShPerChannel + k] = 0.03 * (rng.next_unit() - 0.5);
    }
  }
  return scene;
}

inline Camera raster_fd_camera() { return Camera(10.0, 10.0, 4.0, 4.0, 8, 8); }

// Pixels where every splat encounter keeps a wide margin to the gates.
inline Image safe_pixel_mask(const SplatScene& scene, const Camera& cam) {
  const detail::PreparedScene prep = detail::prepare_scene(scene, cam);
  Image mask(cam.height, cam.width, 1, 1.0);
  for (int py = 0; py < cam.height; ++py) {
    for (int px = 0; px < cam.width; ++px) {
      const size_t tile = (static_cast<size_t>(py) / kTileSize) * prep.tiles_x +
                          (static_cast<size_t>(px) / kTileSize);
      double transmittance = 1.0;
      bool safe = true;
      for (uint32_t si : prep.tile_lists[tile]) {
        const detail::PreparedSplat& s = prep.splats[si];
        const double dx = px + 0.5 - s.mean_x;
        const double dy = py + 0.5 - s.mean_y;
        const double m = s.conic_a * dx * dx + 2.0 * s.conic_b * dx * dy + s.conic_c * dy * dy;
        if (m < 0.0) continue;
        const double alpha_raw = s.opacity * std::exp(-0.5 * m);
        if (alpha_raw > kAlphaCutoff / 1.6 && alpha_raw < kAlphaCutoff * 1.6) safe = false;
        if (alpha_raw > 0.98 * kAlphaClamp) safe = false;
        if (alpha_raw < kAlphaCutoff) continue;
        transmittance *= 1.0 - std::min(alpha_raw, kAlphaClamp);
        if (transmittance > kTransmittanceStop / 1.6 &&
            transmittance < kTransmittanceStop * 1.6) {
          safe = false;
        }
        if (transmittance < kTransmittanceStop) break;
      }
      mask.at(py, px) = safe ? 1.0 : 0.0;
    }
  }
  return mask;
}

inline Image masked_random_grad(const Image& mask, uint64_t seed, int channels = 3) {
  SeededRng rng(seed);
  Image grad(mask.height, mask.width, channels, 0.0);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      for (int c = 0; c < channels; ++c) {
        const double v = 2.0 * rng.next_unit() - 1.0;
        grad.at(y, x, c) = mask.at(y, x) > 0.0 ? v : 0.0;
      }
    }
  }
  return grad;
}

inline double linear_loss(const SplatScene& scene, const Camera& cam, const Image& grad_rgb) {
  const RenderOutput out = rasterize(scene, cam);
  double loss = 0.0;
  for (size_t i = 0; i < out.rgb.data.size(); ++i) loss += out.rgb.data[i] * grad_rgb.data[i];
  return loss;
}

struct RasterFdStats {
  int checked = 0;
  double max_rel_error = 0.0;
};

// Central finite differences over every splat parameter and the background.
// sh_stride subsamples the 48 coefficients to bound runtime.
inline RasterFdStats check_raster_gradients(SplatScene& scene, const Camera& cam,
                                            uint64_t seed, double tolerance,
                                            int sh_stride = 7) {
  const Image mask = safe_pixel_mask(scene, cam);
  const Image grad_rgb = masked_random_grad(mask, seed);
  SplatGradients grads;
  rasterize_backward(scene, cam, grad_rgb, grads);

  RasterFdStats stats;
  const double eps = 1e-4;
  auto check = [&](double* param, double analytic) {
    const double saved = *param;
    *param = saved + eps;
    const double lp = linear_loss(scene, cam, grad_rgb);
    *param = saved - eps;
    const double lm = linear_loss(scene, cam, grad_rgb);
    *param = saved;
    const double fd = (lp - lm) / (2.0 * eps);
    if (std::abs(analytic) < 1e-8 && std::abs(fd) < 1e-8) return;
    const double rel = rel_error(analytic, fd, 1e-8);
    stats.max_rel_error = std::max(stats.max_rel_error, rel);
    ++stats.checked;
    EXPECT_LE(rel, tolerance) << "analytic " << analytic << " fd " << fd;
  };

  for (size_t i = 0; i < scene.splats.size(); ++i) {
    Splat& s = scene.splats[i];
    for (int a = 0; a < 3; ++a) check(&s.position[a], grads.position[i][a]);
    for (int a = 0; a < 3; ++a) check(&s.log_scale[a], grads.log_scale[i][a]);
    check(&s.rotation.w, grads.rotation[i][0]);
    check(&s.rotation.x, grads.rotation[i][1]);
    check(&s.rotation.y, grads.rotation[i][2]);
    check(&s.rotation.z, grads.rotation[i][3]);
    check(&s.opacity_logit, grads.opacity_logit[i]);
    for (int k = 0; k < kShTotal; k += sh_stride) check(&s.sh[k], grads.sh[i][k]);
  }
  for (int k = 0; k < kShTotal; k += sh_stride) {
    check(&scene.background[k], grads.background[k]);
  }
  return stats;
}

}  // namespace fieldsplat::test
