// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <optional>

#include "fieldsplat/camera.hpp"
#include "fieldsplat/image.hpp"
#include "fieldsplat/parallel.hpp"
#include "fieldsplat/rng.hpp"
#include "fieldsplat/voxel_field.hpp"

namespace fieldsplat {

struct VolumeRenderOptions {
  int n_samples = 128;
  bool jitter = false;  // stratified jitter inside each bin; bin midpoint when off
  uint64_t seed = 0;
  uint64_t stream = 0;  // jitter stream (e.g. training iteration)
};

// Clips [ray.t_near, ray.t_far] against an axis-aligned box. Empty optional
// when the ray misses the box.
inline std::optional<std::pair<double, double>> clip_ray_to_aabb(const Ray& ray, const Vec3& bmin,
                                                                 const Vec3& bmax) {
  double t0 = ray.t_near, t1 = ray.t_far;
  for (int a = 0; a < 3; ++a) {
    const double o = ray.origin[a];
    const double d = ray.dir.vec()[a];
    if (d == 0.0) {
      if (o < bmin[a] || o > bmax[a]) return std::nullopt;
      continue;
    }
    double ta = (bmin[a] - o) / d;
    double tb = (bmax[a] - o) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (t0 >= t1) return std::nullopt;
  return std::make_pair(t0, t1);
}

struct RayRender {
  Rgb rgb;
  double median_depth = 0.0;
  double opacity = 0.0;
  double transmittance = 1.0;
};

// Cumulative-weight 0.5 crossing of (t_i, w_i), linearly interpolated from
// the segment start. Returns 0 when no weight was deposited.
inline double median_depth_from_weights(const double* ts, const double* ws, int n, double t_start,
                                        double total_weight) {
  if (!(total_weight > 0.0)) return 0.0;
  const double target = 0.5 * total_weight;
  double cum = 0.0;
  double prev_t = t_start;
  double prev_cum = 0.0;
  for (int i = 0; i < n; ++i) {
    cum += ws[i];
    if (cum >= target) {
      const double span = cum - prev_cum;
      if (span <= 0.0) return ts[i];
      const double frac = (target - prev_cum) / span;
      return prev_t + frac * (ts[i] - prev_t);
    }
    prev_t = ts[i];
    prev_cum = cum;
  }
  return ts[n - 1];
}

// Emission-absorption quadrature along a ray. `query(p, density, sh)` fills
// the activated density and SH coefficients at a world point; `clip` bounds
// the medium (background-only outside). Samples are stratified on the
// clipped interval with constant bin width.
template <typename QueryFn>
RayRender render_ray_quadrature(QueryFn&& query, const Ray& ray, const SHCoeffs& background,
                                const Vec3& clip_min, const Vec3& clip_max,
                                const VolumeRenderOptions& opt, uint64_t element = 0) {
  if (opt.n_samples < 2) {
    throw Error(errc::kInvalidArgument, "need at least 2 samples per ray");
  }
  const SHBasis basis = sh_basis(ray.dir);
  RayRender out;

  const auto clipped = clip_ray_to_aabb(ray, clip_min, clip_max);
  if (clipped) {
    const auto [t0, t1] = *clipped;
    const int n = opt.n_samples;
    const double dt = (t1 - t0) / n;

    thread_local std::vector<double> ts, ws;
    ts.resize(n);
    ws.resize(n);

    double transmittance = 1.0;
    Rgb rgb;
    double total_w = 0.0;
    SHCoeffs sh;
    for (int i = 0; i < n; ++i) {
      const double u =
          opt.jitter ? stratified_offset(opt.seed, opt.stream, element, static_cast<uint64_t>(i))
                     : 0.5;
      const double t = t0 + (i + u) * dt;
      ts[i] = t;
      double density = 0.0;
      query(ray.at(t), density, sh);
      const double alpha = 1.0 - std::exp(-density * dt);
      const double w = transmittance * alpha;
      ws[i] = w;
      if (w > 0.0) {
        const Rgb c = sh_eval(sh, basis);
        rgb.r += w * c.r;
        rgb.g += w * c.g;
        rgb.b += w * c.b;
        total_w += w;
      }
      transmittance *= 1.0 - alpha;
      if (transmittance < 1e-12) {
        // Medium is effectively opaque; the remaining samples carry no weight.
        for (int j = i + 1; j < n; ++j) {
          ts[j] = t0 + (j + 0.5) * dt;
          ws[j] = 0.0;
        }
        break;
      }
    }
    out.rgb = rgb;
    out.opacity = total_w;
    out.transmittance = transmittance;
    out.median_depth = median_depth_from_weights(ts.data(), ws.data(), n, t0, total_w);
  }

  const Rgb bg = sh_eval(background, basis);
  out.rgb.r += out.transmittance * bg.r;
  out.rgb.g += out.transmittance * bg.g;
  out.rgb.b += out.transmittance * bg.b;
  return out;
}

inline RayRender render_ray(const VoxelField& f, const Ray& ray, int n_samples,
                            const VolumeRenderOptions& base = {}, uint64_t element = 0) {
  VolumeRenderOptions opt = base;
  opt.n_samples = n_samples;
  return render_ray_quadrature(
      [&f](const Vec3& p, double& density, SHCoeffs& sh) { sample_field(f, p, density, sh); },
      ray, f.background, f.bbox_min, f.bbox_max, opt, element);
}

inline RenderOutput render_image(const VoxelField& f, const Camera& cam,
                                 const VolumeRenderOptions& opt) {
  RenderOutput out(cam.height, cam.width);
  parallel_rows(static_cast<size_t>(cam.height), [&](size_t y) {
    for (int x = 0; x < cam.width; ++x) {
      const uint64_t element = static_cast<uint64_t>(y) * cam.width + x;
      const Ray ray = pixel_ray(cam, x + 0.5, y + 0.5);
      const RayRender r = render_ray(f, ray, opt.n_samples, opt, element);
      out.rgb.at(static_cast<int>(y), x, 0) = r.rgb.r;
      out.rgb.at(static_cast<int>(y), x, 1) = r.rgb.g;
      out.rgb.at(static_cast<int>(y), x, 2) = r.rgb.b;
      out.depth.at(static_cast<int>(y), x) = r.median_depth;
      out.opacity.at(static_cast<int>(y), x) = r.opacity;
    }
  });
  return out;
}

}  // namespace fieldsplat
