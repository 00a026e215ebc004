// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "fieldsplat/adam.hpp"
#include "fieldsplat/field_train.hpp"  // TraceRow
#include "fieldsplat/metrics.hpp"
#include "fieldsplat/rasterize_backward.hpp"
#include "fieldsplat/rng.hpp"

namespace fieldsplat {

struct FinetuneConfig {
  int iterations = 1000;
  double learning_rate_position = 2e-4;
  double learning_rate_scale = 5e-3;
  double learning_rate_rotation = 1e-3;
  double learning_rate_opacity = 5e-2;
  double learning_rate_sh = 2.5e-3;
  double loss_lambda = 0.2;  // (1-lambda) L1 + lambda (1-SSIM)
  uint64_t seed = 1;

  void validate() const {
    if (iterations < 0 || !(learning_rate_position > 0.0) || !(learning_rate_scale > 0.0) ||
        !(learning_rate_rotation > 0.0) || !(learning_rate_opacity > 0.0) ||
        !(learning_rate_sh > 0.0) || loss_lambda < 0.0 || loss_lambda > 1.0) {
      throw Error(errc::kInvalidArgument, "finetune config values out of range");
    }
  }
};

struct FinetuneResult {
  SplatScene scene;
  std::vector<TraceRow> trace;
};

namespace detail {

inline void gather_splat_params(const SplatScene& scene, std::vector<double>& position,
                                std::vector<double>& log_scale, std::vector<double>& rotation,
                                std::vector<double>& opacity, std::vector<double>& sh) {
  const size_t n = scene.splats.size();
  position.resize(n * 3);
  log_scale.resize(n * 3);
  rotation.resize(n * 4);
  opacity.resize(n);
  sh.resize(n * kShTotal);
  for (size_t i = 0; i < n; ++i) {
    const Splat& s = scene.splats[i];
    for (int a = 0; a < 3; ++a) {
      position[i * 3 + a] = s.position[a];
      log_scale[i * 3 + a] = s.log_scale[a];
    }
    rotation[i * 4 + 0] = s.rotation.w;
    rotation[i * 4 + 1] = s.rotation.x;
    rotation[i * 4 + 2] = s.rotation.y;
    rotation[i * 4 + 3] = s.rotation.z;
    opacity[i] = s.opacity_logit;
    for (int k = 0; k < kShTotal; ++k) sh[i * kShTotal + k] = s.sh[k];
  }
}

inline void scatter_splat_params(SplatScene& scene, const std::vector<double>& position,
                                 const std::vector<double>& log_scale,
                                 const std::vector<double>& rotation,
                                 const std::vector<double>& opacity,
                                 const std::vector<double>& sh) {
  const size_t n = scene.splats.size();
  for (size_t i = 0; i < n; ++i) {
    Splat& s = scene.splats[i];
    for (int a = 0; a < 3; ++a) {
      s.position[a] = position[i * 3 + a];
      s.log_scale[a] = log_scale[i * 3 + a];
    }
    s.rotation = {rotation[i * 4 + 0], rotation[i * 4 + 1], rotation[i * 4 + 2],
                  rotation[i * 4 + 3]};
    s.opacity_logit = opacity[i];
    for (int k = 0; k < kShTotal; ++k) s.sh[k] = sh[i * kShTotal + k];
  }
}

inline void flatten_splat_grads(const SplatGradients& grads, std::vector<double>& position,
                                std::vector<double>& log_scale, std::vector<double>& rotation,
                                std::vector<double>& opacity, std::vector<double>& sh) {
  const size_t n = grads.position.size();
  position.resize(n * 3);
  log_scale.resize(n * 3);
  rotation.resize(n * 4);
  opacity.resize(n);
  sh.resize(n * kShTotal);
  for (size_t i = 0; i < n; ++i) {
    for (int a = 0; a < 3; ++a) {
      position[i * 3 + a] = grads.position[i][a];
      log_scale[i * 3 + a] = grads.log_scale[i][a];
    }
    for (int a = 0; a < 4; ++a) rotation[i * 4 + a] = grads.rotation[i][a];
    opacity[i] = grads.opacity_logit[i];
    for (int k = 0; k < kShTotal; ++k) sh[i * kShTotal + k] = grads.sh[i][k];
  }
}

}  // namespace detail

// Loss and d(loss)/d(render) for the (1-lambda) L1 + lambda DSSIM objective.
inline double image_loss(const Image& render, const Image& target, double lambda,
                         Image& grad_rgb) {
  require_same_shape(render, target);
  const double n = static_cast<double>(render.data.size());
  double l1 = 0.0;
  grad_rgb = Image(render.height, render.width, render.channels, 0.0);
  for (size_t i = 0; i < render.data.size(); ++i) {
    const double d = render.data[i] - target.data[i];
    l1 += std::abs(d);
    grad_rgb.data[i] = (1.0 - lambda) * (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) / n;
  }
  l1 /= n;
  double ssim_value = 1.0;
  if (lambda > 0.0) {
    Image ssim_grad;
    ssim_value = ssim(render, target, &ssim_grad);
    for (size_t i = 0; i < grad_rgb.data.size(); ++i) {
      grad_rgb.data[i] -= lambda * ssim_grad.data[i];
    }
  }
  return (1.0 - lambda) * l1 + lambda * (1.0 - ssim_value);
}

// Adjusts existing Gaussians only: no densify/clone/split/prune. Whole-image
// batches in seeded random view order; background SH stays fixed.
inline FinetuneResult finetune(SplatScene scene, const std::vector<Camera>& cams,
                               const std::vector<Image>& images, const FinetuneConfig& cfg) {
  cfg.validate();
  if (cams.empty() || cams.size() != images.size()) {
    throw Error(errc::kShapeMismatch, "need one image per camera");
  }
  for (size_t i = 0; i < cams.size(); ++i) {
    if (images[i].height != cams[i].height || images[i].width != cams[i].width ||
        images[i].channels != 3) {
      throw Error(errc::kShapeMismatch, "image dimensions do not match camera");
    }
  }
  FinetuneResult result;
  result.trace.reserve(cfg.iterations);

  const size_t n = scene.splats.size();
  std::vector<double> p_position, p_scale, p_rotation, p_opacity, p_sh;
  detail::gather_splat_params(scene, p_position, p_scale, p_rotation, p_opacity, p_sh);
  Adam adam_position(n * 3), adam_scale(n * 3), adam_rotation(n * 4), adam_opacity(n),
      adam_sh(n * kShTotal);
  std::vector<double> g_position, g_scale, g_rotation, g_opacity, g_sh;

  SeededRng rng(cfg.seed);
  std::vector<size_t> order(cams.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  size_t order_pos = 0;

  SplatGradients grads;
  Image grad_rgb;
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    if (order_pos == order.size()) {
      rng.shuffle(order);
      order_pos = 0;
    }
    const size_t view = order[order_pos++];

    const RenderOutput render = rasterize(scene, cams[view]);
    const double loss = image_loss(render.rgb, images[view], cfg.loss_lambda, grad_rgb);
    rasterize_backward(scene, cams[view], grad_rgb, grads);
    detail::flatten_splat_grads(grads, g_position, g_scale, g_rotation, g_opacity, g_sh);

    adam_position.step(p_position, g_position, cfg.learning_rate_position);
    adam_scale.step(p_scale, g_scale, cfg.learning_rate_scale);
    adam_rotation.step(p_rotation, g_rotation, cfg.learning_rate_rotation);
    adam_opacity.step(p_opacity, g_opacity, cfg.learning_rate_opacity);
    adam_sh.step(p_sh, g_sh, cfg.learning_rate_sh);
    detail::scatter_splat_params(scene, p_position, p_scale, p_rotation, p_opacity, p_sh);

    double mse = 0.0;
    for (size_t i = 0; i < render.rgb.data.size(); ++i) {
      const double d = render.rgb.data[i] - images[view].data[i];
      mse += d * d;
    }
    mse /= static_cast<double>(render.rgb.data.size());
    const double view_psnr =
        mse > 0.0 ? -10.0 * std::log10(mse) : std::numeric_limits<double>::infinity();
    result.trace.push_back({iter, loss, view_psnr});
  }
  // Orientations are normalized on use; store them normalized as well.
  for (Splat& s : scene.splats) {
    const double qn = s.rotation.norm();
    if (qn > 0.0) s.rotation = s.rotation.normalized();
  }
  result.scene = std::move(scene);
  return result;
}

// Random splat soup inside a box: the from-scratch baseline initializer.
// The background starts as the given constant color.
inline SplatScene random_scene(const Vec3& bbox_min, const Vec3& bbox_max, size_t count,
                               uint64_t seed, const SHCoeffs& background) {
  SplatScene scene;
  scene.background = background;
  SeededRng rng(seed);
  const Vec3 extent = bbox_max - bbox_min;
  const double volume = extent.x() * extent.y() * extent.z();
  const double spacing = std::cbrt(volume / std::max<size_t>(count, 1));
  const double scale = 0.5 * spacing;
  scene.splats.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    Splat s;
    for (int a = 0; a < 3; ++a) {
      s.position[a] = bbox_min[a] + rng.next_unit() * extent[a];
    }
    s.log_scale = Vec3::Constant(std::log(scale));
    s.rotation = Quaternion::identity();
    s.opacity_logit = logit(0.1);
    s.sh = zero_sh();
    for (int ch = 0; ch < 3; ++ch) {
      s.sh[ch * kShPerChannel] = (0.2 + 0.6 * rng.next_unit() - 0.5) / shc::k0;
    }
    scene.splats.push_back(s);
  }
  return scene;
}

}  // namespace fieldsplat
