// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "fieldsplat/adam.hpp"
#include "fieldsplat/volume_render.hpp"

namespace fieldsplat {

struct TrainConfig {
  int iterations = 1500;
  int rays_per_batch = 1024;
  double learning_rate_density = 0.08;
  double learning_rate_sh = 0.01;
  double learning_rate_background = 0.01;
  int samples_per_ray = 96;
  uint64_t seed = 1;
  bool stratified = true;  // jittered-uniform samples; bin midpoints when off

  void validate() const {
    if (iterations < 0 || rays_per_batch <= 0 || samples_per_ray < 2 ||
        !(learning_rate_density > 0.0) || !(learning_rate_sh > 0.0) ||
        !(learning_rate_background > 0.0)) {
      throw Error(errc::kInvalidArgument, "train config values must be positive");
    }
  }
};

struct FieldGradients {
  std::vector<double> raw_density;
  std::vector<double> sh;
  SHCoeffs background = zero_sh();

  void resize_like(const VoxelField& f) {
    raw_density.assign(f.voxel_count(), 0.0);
    sh.assign(f.voxel_count() * kShTotal, 0.0);
    background.fill(0.0);
  }
};

struct TraceRow {
  int iteration = 0;
  double loss = 0.0;
  double psnr = 0.0;
};

namespace detail {

// One corner's share of a sample's gradient. d_color[ch] multiplies the
// per-ray SH basis to give the 16 coefficient gradients of that channel.
struct CornerGrad {
  uint32_t corner;
  double d_raw_density;
  double d_color[3];
};

struct RayWork {
  std::vector<CornerGrad> entries;
  SHBasis basis;
  double bg_factor[3];  // multiplies basis for the background gradient
  double sq_error = 0.0;
};

// Forward pass identical to render_ray_quadrature followed by an analytic
// backward pass. grad_scale is d(loss)/d(squared error sum) for one ray,
// i.e. 1 / (rays * channels) differentiated through the mean.
inline void ray_loss_backward(const VoxelField& f, const Ray& ray, const Rgb& target,
                              const VolumeRenderOptions& opt, uint64_t element, double grad_scale,
                              RayWork& work) {
  work.entries.clear();
  work.basis = sh_basis(ray.dir);
  work.bg_factor[0] = work.bg_factor[1] = work.bg_factor[2] = 0.0;

  const auto clipped = clip_ray_to_aabb(ray, f.bbox_min, f.bbox_max);
  const int n = opt.n_samples;

  thread_local std::vector<TrilinearStencil> stencils;
  thread_local std::vector<double> raws, alphas, trans, weights;
  thread_local std::vector<Rgb> colors;
  stencils.resize(n);
  raws.resize(n);
  alphas.resize(n);
  trans.resize(n);
  weights.resize(n);
  colors.resize(n);

  Rgb rgb;
  double transmittance = 1.0;
  int n_used = 0;
  double t0 = 0.0, dt = 0.0;
  if (clipped) {
    const auto [a, b] = *clipped;
    t0 = a;
    dt = (b - a) / n;
    SHCoeffs sh;
    for (int i = 0; i < n; ++i) {
      const double u =
          opt.jitter ? stratified_offset(opt.seed, opt.stream, element, static_cast<uint64_t>(i))
                     : 0.5;
      const Vec3 p = ray.at(t0 + (i + u) * dt);
      const TrilinearStencil s = trilinear_stencil(f, p);
      stencils[i] = s;
      double density = 0.0;
      double raw = 0.0;
      if (s.inside) {
        raw = interpolate_raw_density(f, s);
        density = softplus(raw);
      }
      raws[i] = raw;
      const double alpha = 1.0 - std::exp(-density * dt);
      const double w = transmittance * alpha;
      alphas[i] = alpha;
      trans[i] = transmittance;
      weights[i] = w;
      if (w > 0.0) {
        interpolate_sh(f, s, sh);
        const Rgb c = sh_eval(sh, work.basis);
        colors[i] = c;
        rgb.r += w * c.r;
        rgb.g += w * c.g;
        rgb.b += w * c.b;
      } else {
        colors[i] = Rgb{};
      }
      transmittance *= 1.0 - alpha;
      ++n_used;
      if (transmittance < 1e-12) break;
    }
  }
  const Rgb bg_raw = sh_eval_raw(f.background, work.basis);
  Rgb bg;
  for (int ch = 0; ch < 3; ++ch) bg[ch] = std::clamp(bg_raw[ch] + 0.5, 0.0, 1.0);
  rgb.r += transmittance * bg.r;
  rgb.g += transmittance * bg.g;
  rgb.b += transmittance * bg.b;

  double grad_rgb[3];
  double sq = 0.0;
  for (int ch = 0; ch < 3; ++ch) {
    const double r = rgb[ch] - target[ch];
    sq += r * r;
    grad_rgb[ch] = 2.0 * r * grad_scale;
  }
  work.sq_error = sq;

  for (int ch = 0; ch < 3; ++ch) {
    work.bg_factor[ch] = grad_rgb[ch] * transmittance * sh_clamp_gate(bg_raw[ch]);
  }

  if (!clipped) return;

  // Suffix accumulation back to front: suffix = sum_{j>i} w_j c_j + T_fin bg.
  Rgb suffix;
  suffix.r = transmittance * bg.r;
  suffix.g = transmittance * bg.g;
  suffix.b = transmittance * bg.b;
  for (int i = n_used - 1; i >= 0; --i) {
    const TrilinearStencil& s = stencils[i];
    const double w = weights[i];
    const Rgb& c = colors[i];
    const double t_next = trans[i] * (1.0 - alphas[i]);
    // d(rgb)/d(sigma_i) = dt * (T_{i+1} c_i - suffix).
    double g_sigma = 0.0;
    for (int ch = 0; ch < 3; ++ch) {
      g_sigma += grad_rgb[ch] * (t_next * c[ch] - suffix[ch]);
    }
    g_sigma *= dt;
    if (s.inside) {
      const double g_raw = g_sigma * softplus_derivative(raws[i]);
      double d_color[3] = {0.0, 0.0, 0.0};
      if (w > 0.0) {
        // Color clamp gates: recompute the raw sums once per sample.
        SHCoeffs sh;
        interpolate_sh(f, s, sh);
        const Rgb craw = sh_eval_raw(sh, work.basis);
        for (int ch = 0; ch < 3; ++ch) {
          d_color[ch] = grad_rgb[ch] * w * sh_clamp_gate(craw[ch]);
        }
      }
      for (int cidx = 0; cidx < 8; ++cidx) {
        const double cw = s.weight[cidx];
        if (cw == 0.0) continue;
        work.entries.push_back({static_cast<uint32_t>(s.corner[cidx]), g_raw * cw,
                                {d_color[0] * cw, d_color[1] * cw, d_color[2] * cw}});
      }
    }
    suffix.r += w * c.r;
    suffix.g += w * c.g;
    suffix.b += w * c.b;
  }
}

}  // namespace detail

// Mean-squared-error loss over a ray batch with analytic gradients for
// raw_density, sh and background. Accumulation is deterministic for any
// thread count: per-ray contributions are computed in parallel, then applied
// in ray order by workers that each own a fixed slice of the voxel range.
inline double loss_and_gradients(const VoxelField& f, std::span<const Ray> rays,
                                 std::span<const Rgb> targets, const VolumeRenderOptions& opt,
                                 FieldGradients& grads) {
  if (rays.empty()) throw Error(errc::kEmptyBatch, "ray batch is empty");
  if (rays.size() != targets.size()) {
    throw Error(errc::kShapeMismatch, "ray and target counts differ");
  }
  grads.resize_like(f);

  const double grad_scale = 1.0 / (static_cast<double>(rays.size()) * 3.0);
  const size_t window = 512;
  static constexpr size_t kScatterPartitions = 8;
  std::vector<detail::RayWork> works(std::min(window, rays.size()));
  const size_t voxels = f.voxel_count();

  double sq_sum = 0.0;
  for (size_t w0 = 0; w0 < rays.size(); w0 += window) {
    const size_t w1 = std::min(rays.size(), w0 + window);
    const size_t nw = w1 - w0;
    parallel_chunks(nw, 16, [&](size_t begin, size_t end, size_t) {
      for (size_t i = begin; i < end; ++i) {
        detail::ray_loss_backward(f, rays[w0 + i], targets[w0 + i], opt, w0 + i, grad_scale,
                                  works[i]);
      }
    });
    // Scatter phase: worker p owns voxel indices [p*voxels/P, (p+1)*voxels/P).
    parallel_chunks(kScatterPartitions, 1, [&](size_t p, size_t, size_t) {
      const size_t lo = p * voxels / kScatterPartitions;
      const size_t hi = (p + 1) * voxels / kScatterPartitions;
      for (size_t i = 0; i < nw; ++i) {
        const detail::RayWork& work = works[i];
        for (const detail::CornerGrad& e : work.entries) {
          if (e.corner < lo || e.corner >= hi) continue;
          grads.raw_density[e.corner] += e.d_raw_density;
          if (e.d_color[0] != 0.0 || e.d_color[1] != 0.0 || e.d_color[2] != 0.0) {
            double* dst = grads.sh.data() + static_cast<size_t>(e.corner) * kShTotal;
            for (int ch = 0; ch < 3; ++ch) {
              const double fch = e.d_color[ch];
              if (fch == 0.0) continue;
              for (int k = 0; k < kShPerChannel; ++k) {
                dst[ch * kShPerChannel + k] += fch * work.basis[k];
              }
            }
          }
        }
      }
    });
    for (size_t i = 0; i < nw; ++i) {
      const detail::RayWork& work = works[i];
      sq_sum += work.sq_error;
      for (int ch = 0; ch < 3; ++ch) {
        const double fch = work.bg_factor[ch];
        if (fch == 0.0) continue;
        for (int k = 0; k < kShPerChannel; ++k) {
          grads.background[ch * kShPerChannel + k] += fch * work.basis[k];
        }
      }
    }
  }
  return sq_sum * grad_scale;
}

struct FieldTrainResult {
  VoxelField field;
  std::vector<TraceRow> trace;
};

// Adam training of a voxel field on posed images. Ray batches are drawn
// uniformly over all training pixels with replacement from the seeded
// generator, so runs are reproducible.
inline FieldTrainResult train_field(VoxelField field, const std::vector<Camera>& cams,
                                    const std::vector<Image>& images, const TrainConfig& cfg) {
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

  FieldTrainResult result;
  result.trace.reserve(cfg.iterations);

  Adam adam_density(field.voxel_count());
  Adam adam_sh(field.voxel_count() * kShTotal);
  Adam adam_background(kShTotal);

  SeededRng rng(cfg.seed);
  FieldGradients grads;
  std::vector<Ray> rays;
  std::vector<Rgb> targets;
  rays.reserve(cfg.rays_per_batch);
  targets.reserve(cfg.rays_per_batch);

  VolumeRenderOptions opt;
  opt.n_samples = cfg.samples_per_ray;
  opt.jitter = cfg.stratified;
  opt.seed = cfg.seed;

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    rays.clear();
    targets.clear();
    for (int r = 0; r < cfg.rays_per_batch; ++r) {
      const size_t img = rng.next_below(cams.size());
      const Camera& cam = cams[img];
      const int px = static_cast<int>(rng.next_below(static_cast<uint64_t>(cam.width)));
      const int py = static_cast<int>(rng.next_below(static_cast<uint64_t>(cam.height)));
      rays.push_back(pixel_ray(cam, px + 0.5, py + 0.5));
      targets.push_back(Rgb{images[img].at(py, px, 0), images[img].at(py, px, 1),
                            images[img].at(py, px, 2)});
    }
    opt.stream = static_cast<uint64_t>(iter) + 1;
    const double loss = loss_and_gradients(field, rays, targets, opt, grads);

    adam_density.step(field.raw_density, grads.raw_density, cfg.learning_rate_density);
    adam_sh.step(field.sh, grads.sh, cfg.learning_rate_sh);
    adam_background.step(field.background.data(), grads.background.data(),
                         cfg.learning_rate_background);

    const double psnr = loss > 0.0 ? -10.0 * std::log10(loss)
                                   : std::numeric_limits<double>::infinity();
    result.trace.push_back({iter, loss, psnr});
  }
  result.field = std::move(field);
  return result;
}

}  // namespace fieldsplat
