// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <vector>

#include "fieldsplat/field_train.hpp"
#include "fieldsplat/knn.hpp"
#include "fieldsplat/rasterize.hpp"
#include "fieldsplat/splat.hpp"
#include "fieldsplat/volume_render.hpp"

namespace fieldsplat {

struct N2GConfig {
  size_t n_rays = 2'000'000;
  double opacity_threshold = 0.98;
  double max_depth = 8.0;  // sky rejection backstop
  int knn_k = 3;
  uint64_t seed = 1;

  void validate() const {
    if (n_rays == 0 || !(opacity_threshold > 0.0 && opacity_threshold <= 1.0) ||
        !(max_depth > 0.0) || knn_k < 1) {
      throw Error(errc::kInvalidArgument, "conversion config values out of range");
    }
  }
};

struct PointSample {
  Vec3 point = Vec3::Zero();
  double density = 0.0;
  SHCoeffs sh = zero_sh();
};

struct ConversionReport {
  size_t rays_cast = 0;
  size_t kept = 0;
  size_t filtered_by_opacity = 0;
  size_t filtered_by_depth = 0;
  size_t dropped_zero_opacity = 0;
  double elapsed_seconds = 0.0;
};

inline Json conversion_report_to_json(const ConversionReport& r) {
  return Json{{"rays_cast", r.rays_cast},
              {"kept", r.kept},
              {"filtered_by_opacity", r.filtered_by_opacity},
              {"filtered_by_depth", r.filtered_by_depth},
              {"dropped_zero_opacity", r.dropped_zero_opacity},
              {"elapsed_seconds", r.elapsed_seconds}};
}

// Surface point cloud from median depths: rays are drawn uniformly over all
// training pixels (with replacement), rendered for opacity and median depth,
// and kept only where the ray hit something solid that is not sky.
inline std::vector<PointSample> extract_pointcloud(const VoxelField& field,
                                                   const std::vector<Camera>& cams,
                                                   const N2GConfig& cfg, int samples_per_ray,
                                                   ConversionReport* report = nullptr) {
  cfg.validate();
  if (cams.empty()) throw Error(errc::kInvalidArgument, "need at least one camera");
  const auto t_start = std::chrono::steady_clock::now();

  size_t total_pixels = 0;
  std::vector<size_t> cum;
  cum.reserve(cams.size());
  for (const Camera& cam : cams) {
    total_pixels += static_cast<size_t>(cam.width) * cam.height;
    cum.push_back(total_pixels);
  }

  struct RaySpec {
    uint32_t cam;
    uint16_t px, py;
  };
  SeededRng rng(cfg.seed);
  std::vector<RaySpec> specs(cfg.n_rays);
  for (RaySpec& s : specs) {
    const size_t flat = rng.next_below(total_pixels);
    size_t c = 0;
    while (flat >= cum[c]) ++c;
    const size_t local = flat - (c == 0 ? 0 : cum[c - 1]);
    s.cam = static_cast<uint32_t>(c);
    s.px = static_cast<uint16_t>(local % cams[c].width);
    s.py = static_cast<uint16_t>(local / cams[c].width);
  }

  struct RayResult {
    uint8_t status;  // 0 keep, 1 low opacity, 2 bad depth
    PointSample sample;
  };
  std::vector<RayResult> results(cfg.n_rays);
  VolumeRenderOptions opt;
  opt.n_samples = samples_per_ray;
  parallel_chunks(cfg.n_rays, 256, [&](size_t begin, size_t end, size_t) {
    for (size_t i = begin; i < end; ++i) {
      const RaySpec& s = specs[i];
      const Camera& cam = cams[s.cam];
      const Ray ray = pixel_ray(cam, s.px + 0.5, s.py + 0.5);
      const RayRender r = render_ray(field, ray, samples_per_ray, opt);
      RayResult& res = results[i];
      if (r.opacity < cfg.opacity_threshold) {
        res.status = 1;
      } else if (!(r.median_depth > 0.0) || r.median_depth > cfg.max_depth) {
        res.status = 2;
      } else {
        res.status = 0;
        res.sample.point = ray.at(r.median_depth);
        sample_field(field, res.sample.point, res.sample.density, res.sample.sh);
      }
    }
  });

  std::vector<PointSample> points;
  ConversionReport rep;
  rep.rays_cast = cfg.n_rays;
  for (const RayResult& res : results) {
    if (res.status == 0) {
      points.push_back(res.sample);
    } else if (res.status == 1) {
      ++rep.filtered_by_opacity;
    } else {
      ++rep.filtered_by_depth;
    }
  }
  rep.kept = points.size();
  rep.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  if (report) *report = rep;
  if (points.empty()) {
    throw Error(errc::kNoSurface, "no rays passed the opacity and depth filters");
  }
  return points;
}

inline constexpr double kOpacityLogitCap = 15.0;

// NeRF-to-splats: one isotropic Gaussian per kept surface point. Scale is
// half the mean distance to the knn_k nearest neighbors; opacity treats the
// splat diameter as the optical path through the field's density there.
inline SplatScene nerf_to_gs(const VoxelField& field, const std::vector<Camera>& cams,
                             const N2GConfig& cfg, int samples_per_ray,
                             ConversionReport* report = nullptr) {
  const auto t_start = std::chrono::steady_clock::now();
  ConversionReport rep;
  const std::vector<PointSample> points =
      extract_pointcloud(field, cams, cfg, samples_per_ray, &rep);

  std::vector<Vec3> positions;
  positions.reserve(points.size());
  for (const PointSample& p : points) positions.push_back(p.point);
  const std::vector<double> mean_dist = knn_mean_distance(positions, cfg.knn_k);

  SplatScene scene;
  scene.background = field.background;
  scene.splats.reserve(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    const double scale = 0.5 * mean_dist[i];
    if (!(scale > 0.0)) continue;  // coincident points
    const double alpha = 1.0 - std::exp(-points[i].density * 2.0 * scale);
    if (alpha <= 0.0) {
      ++rep.dropped_zero_opacity;
      continue;
    }
    Splat s;
    s.position = points[i].point;
    s.log_scale = Vec3::Constant(std::log(scale));
    s.rotation = Quaternion::identity();
    s.opacity_logit = std::clamp(logit(alpha), -kOpacityLogitCap, kOpacityLogitCap);
    s.sh = points[i].sh;
    scene.splats.push_back(s);
  }
  rep.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  if (report) *report = rep;
  return scene;
}

struct G2NConfig {
  int nx = 64, ny = 64, nz = 64;
  TrainConfig train;
  bool reuse_field = false;
  // Fresh-fit bounds; derived from the splat positions when absent.
  std::optional<Vec3> bbox_min;
  std::optional<Vec3> bbox_max;
  double init_raw_density = -4.6;

  void validate() const {
    if (nx <= 0 || ny <= 0 || nz <= 0) {
      throw Error(errc::kInvalidArgument, "field dims must be positive");
    }
    train.validate();
  }
};

struct G2NResult {
  VoxelField field;
  std::vector<Image> renders;  // the splat renders the field was fit to
  std::vector<TraceRow> trace;
};

// Splats-to-NeRF: rasterize every training view, then fit a fresh field (or
// update f0) on those renders.
inline G2NResult gs_to_nerf(const SplatScene& scene, const std::vector<Camera>& cams,
                            const G2NConfig& cfg, const VoxelField* f0 = nullptr) {
  cfg.validate();
  if (cams.empty()) throw Error(errc::kInvalidArgument, "need at least one camera");
  if (cfg.reuse_field && f0 == nullptr) {
    throw Error(errc::kInvalidArgument, "reuse_field requires an existing field");
  }

  G2NResult result;
  result.renders.reserve(cams.size());
  for (const Camera& cam : cams) {
    result.renders.push_back(rasterize(scene, cam).rgb);
  }

  VoxelField field;
  if (cfg.reuse_field) {
    field = *f0;
  } else {
    Vec3 mn, mx;
    if (cfg.bbox_min && cfg.bbox_max) {
      mn = *cfg.bbox_min;
      mx = *cfg.bbox_max;
    } else {
      if (scene.splats.empty()) {
        mn = Vec3(-1, -1, -1);
        mx = Vec3(1, 1, 1);
      } else {
        mn = scene.splats[0].position;
        mx = mn;
        double max_scale = 0.0;
        for (const Splat& s : scene.splats) {
          mn = mn.cwiseMin(s.position);
          mx = mx.cwiseMax(s.position);
          max_scale = std::max(max_scale, s.scale().maxCoeff());
        }
        const double pad = std::max(3.0 * max_scale, 0.05 * (mx - mn).norm());
        mn -= Vec3::Constant(pad);
        mx += Vec3::Constant(pad);
      }
    }
    field = VoxelField(mn, mx, cfg.nx, cfg.ny, cfg.nz, cfg.init_raw_density);
  }

  FieldTrainResult trained = train_field(std::move(field), cams, result.renders, cfg.train);
  result.field = std::move(trained.field);
  result.trace = std::move(trained.trace);
  return result;
}

}  // namespace fieldsplat
