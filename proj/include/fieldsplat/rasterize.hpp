// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "fieldsplat/camera.hpp"
#include "fieldsplat/image.hpp"
#include "fieldsplat/parallel.hpp"
#include "fieldsplat/splat.hpp"

namespace fieldsplat {

// Rasterizer constants: 2D dilation, alpha cutoff/clamp, transmittance stop,
// tile size. Standard values for splat rasterizers.
inline constexpr double kCovDilation = 0.3;
inline constexpr double kAlphaCutoff = 1.0 / 255.0;
inline constexpr double kAlphaClamp = 0.999;
inline constexpr double kTransmittanceStop = 1e-4;
inline constexpr double kNearClip = 0.01;
inline constexpr double kSingularDet = 1e-12;
inline constexpr int kTileSize = 16;

struct SplatProjection {
  Vec2 mean2d = Vec2::Zero();
  Mat2 cov2d = Mat2::Zero();
  double depth = 0.0;
};

namespace detail {

// Everything the forward and backward passes need about one projected splat.
struct ProjectionDetail {
  bool culled = true;
  bool singular = false;
  Vec3 p_cam = Vec3::Zero();
  double depth = 0.0;
  Vec2 mean2d = Vec2::Zero();
  Eigen::Matrix<double, 2, 3> J = Eigen::Matrix<double, 2, 3>::Zero();
  Mat3 W = Mat3::Identity();        // camera-from-world rotation
  Mat3 R = Mat3::Identity();        // splat rotation (normalized quaternion)
  Vec3 scale = Vec3::Ones();        // exp(log_scale)
  Mat3 sigma_world = Mat3::Zero();
  Mat2 cov2d = Mat2::Zero();
  Mat2 conic = Mat2::Zero();
  Vec3 dir = Vec3::UnitZ();         // viewing direction, camera center to splat
  double dist = 0.0;
  SHBasis basis{};
  Rgb color_raw;
  Rgb color;
  double radius = 0.0;              // pixel radius covering the alpha cutoff
};

inline ProjectionDetail project_detail(const Splat& splat, const Camera& cam) {
  ProjectionDetail out;
  out.W = cam.world_to_cam_rotation();
  const Vec3 cam_center = cam.center();
  out.p_cam = out.W * (splat.position - cam_center);
  out.depth = -out.p_cam.z();
  if (out.depth <= kNearClip) return out;  // behind or too close: culled

  const double x = out.p_cam.x(), y = out.p_cam.y(), z = out.p_cam.z();
  const double iz = 1.0 / z;
  out.mean2d = Vec2(cam.cx - cam.fx * x * iz, cam.cy + cam.fy * y * iz);

  out.J(0, 0) = -cam.fx * iz;
  out.J(0, 2) = cam.fx * x * iz * iz;
  out.J(1, 1) = cam.fy * iz;
  out.J(1, 2) = -cam.fy * y * iz * iz;

  out.R = rotation_matrix(splat.rotation.normalized());
  out.scale = splat.scale();
  const Mat3 M = out.R * out.scale.asDiagonal();
  out.sigma_world = M * M.transpose();

  const Eigen::Matrix<double, 2, 3> A = out.J * out.W;
  out.cov2d = A * out.sigma_world * A.transpose() + kCovDilation * Mat2::Identity();

  const double det = out.cov2d.determinant();
  if (!std::isfinite(det) || det <= kSingularDet) {
    out.singular = true;
    return out;
  }
  out.conic << out.cov2d(1, 1) / det, -out.cov2d(0, 1) / det, -out.cov2d(1, 0) / det,
      out.cov2d(0, 0) / det;

  // Cull on the axis-aligned bounds of the 3-sigma ellipse.
  const double ex = 3.0 * std::sqrt(std::max(out.cov2d(0, 0), 0.0));
  const double ey = 3.0 * std::sqrt(std::max(out.cov2d(1, 1), 0.0));
  if (out.mean2d.x() + ex < 0.0 || out.mean2d.x() - ex > cam.width ||
      out.mean2d.y() + ey < 0.0 || out.mean2d.y() - ey > cam.height) {
    return out;
  }
  out.culled = false;

  // Tile coverage must reach the alpha cutoff boundary (up to ~3.33 sigma),
  // not just 3 sigma.
  const double tr = 0.5 * (out.cov2d(0, 0) + out.cov2d(1, 1));
  const double disc = std::sqrt(std::max(tr * tr - det, 0.0));
  const double lambda_max = tr + disc;
  out.radius = std::ceil(3.4 * std::sqrt(lambda_max));

  out.dist = (splat.position - cam_center).norm();
  out.dir = out.dist > 0.0 ? Vec3((splat.position - cam_center) / out.dist) : Vec3::UnitZ();
  out.basis = sh_basis(Direction(out.dir));
  out.color_raw = sh_eval_raw(splat.sh, out.basis);
  for (int ch = 0; ch < 3; ++ch) {
    out.color[ch] = std::clamp(out.color_raw[ch] + 0.5, 0.0, 1.0);
  }
  return out;
}

// Compact per-splat record for the pixel loops.
struct PreparedSplat {
  uint32_t id = 0;
  double mean_x = 0.0, mean_y = 0.0;
  double conic_a = 0.0, conic_b = 0.0, conic_c = 0.0;
  double depth = 0.0;
  double opacity = 0.0;
  Rgb color;
  double radius = 0.0;
};

struct PreparedScene {
  std::vector<PreparedSplat> splats;  // sorted front to back, ties by id
  int tiles_x = 0, tiles_y = 0;
  std::vector<std::vector<uint32_t>> tile_lists;  // indices into splats, sorted order
  size_t n_culled = 0;
  size_t n_singular = 0;
};

inline PreparedScene prepare_scene(const SplatScene& scene, const Camera& cam) {
  PreparedScene prep;
  prep.tiles_x = (cam.width + kTileSize - 1) / kTileSize;
  prep.tiles_y = (cam.height + kTileSize - 1) / kTileSize;
  prep.splats.reserve(scene.splats.size());
  for (uint32_t i = 0; i < scene.splats.size(); ++i) {
    const ProjectionDetail d = project_detail(scene.splats[i], cam);
    if (d.singular) {
      ++prep.n_singular;
      continue;
    }
    if (d.culled) {
      ++prep.n_culled;
      continue;
    }
    PreparedSplat p;
    p.id = i;
    p.mean_x = d.mean2d.x();
    p.mean_y = d.mean2d.y();
    p.conic_a = d.conic(0, 0);
    p.conic_b = d.conic(0, 1);
    p.conic_c = d.conic(1, 1);
    p.depth = d.depth;
    p.opacity = scene.splats[i].opacity();
    p.color = d.color;
    p.radius = d.radius;
    prep.splats.push_back(p);
  }
  std::sort(prep.splats.begin(), prep.splats.end(),
            [](const PreparedSplat& a, const PreparedSplat& b) {
              if (a.depth != b.depth) return a.depth < b.depth;
              return a.id < b.id;
            });
  prep.tile_lists.assign(static_cast<size_t>(prep.tiles_x) * prep.tiles_y, {});
  for (uint32_t s = 0; s < prep.splats.size(); ++s) {
    const PreparedSplat& p = prep.splats[s];
    const int x0 = std::clamp(static_cast<int>(std::floor(p.mean_x - p.radius)) / kTileSize, 0,
                              prep.tiles_x - 1);
    const int x1 = std::clamp(static_cast<int>(std::ceil(p.mean_x + p.radius)) / kTileSize, 0,
                              prep.tiles_x - 1);
    const int y0 = std::clamp(static_cast<int>(std::floor(p.mean_y - p.radius)) / kTileSize, 0,
                              prep.tiles_y - 1);
    const int y1 = std::clamp(static_cast<int>(std::ceil(p.mean_y + p.radius)) / kTileSize, 0,
                              prep.tiles_y - 1);
    for (int ty = y0; ty <= y1; ++ty) {
      for (int tx = x0; tx <= x1; ++tx) {
        prep.tile_lists[static_cast<size_t>(ty) * prep.tiles_x + tx].push_back(s);
      }
    }
  }
  return prep;
}

}  // namespace detail

// EWA projection of one splat. Empty optional means the splat was culled
// (behind the near plane or its 3-sigma ellipse misses the image).
inline std::optional<SplatProjection> project_splat(const Splat& splat, const Camera& cam) {
  const detail::ProjectionDetail d = detail::project_detail(splat, cam);
  if (d.culled) return std::nullopt;
  return SplatProjection{d.mean2d, d.cov2d, d.depth};
}

struct RasterizeStats {
  size_t n_culled = 0;
  size_t n_singular = 0;
};

// Front-to-back tile rasterization with per-pixel alpha compositing over the
// background SH color. Depth is the alpha-weighted mean splat depth
// normalized by accumulated weight.
inline RenderOutput rasterize(const SplatScene& scene, const Camera& cam,
                              RasterizeStats* stats = nullptr) {
  const detail::PreparedScene prep = detail::prepare_scene(scene, cam);
  if (stats) {
    stats->n_culled = prep.n_culled;
    stats->n_singular = prep.n_singular;
  }
  RenderOutput out(cam.height, cam.width);
  const size_t n_tiles = prep.tile_lists.size();
  parallel_chunks(n_tiles, 1, [&](size_t tile, size_t, size_t) {
    const int tx = static_cast<int>(tile) % prep.tiles_x;
    const int ty = static_cast<int>(tile) / prep.tiles_x;
    const int px0 = tx * kTileSize;
    const int py0 = ty * kTileSize;
    const int px1 = std::min(cam.width, px0 + kTileSize);
    const int py1 = std::min(cam.height, py0 + kTileSize);
    const std::vector<uint32_t>& list = prep.tile_lists[tile];
    for (int py = py0; py < py1; ++py) {
      for (int px = px0; px < px1; ++px) {
        const double cx = px + 0.5, cy = py + 0.5;
        double transmittance = 1.0;
        double r = 0.0, g = 0.0, b = 0.0;
        double depth_acc = 0.0, wsum = 0.0;
        for (const uint32_t si : list) {
          const detail::PreparedSplat& s = prep.splats[si];
          const double dx = cx - s.mean_x;
          const double dy = cy - s.mean_y;
          const double m = s.conic_a * dx * dx + 2.0 * s.conic_b * dx * dy +
                           s.conic_c * dy * dy;
          if (m < 0.0) continue;
          double alpha = s.opacity * std::exp(-0.5 * m);
          if (alpha < kAlphaCutoff) continue;
          alpha = std::min(alpha, kAlphaClamp);
          const double w = transmittance * alpha;
          r += w * s.color.r;
          g += w * s.color.g;
          b += w * s.color.b;
          depth_acc += w * s.depth;
          wsum += w;
          transmittance *= 1.0 - alpha;
          if (transmittance < kTransmittanceStop) break;
        }
        const Rgb bg = sh_eval(scene.background, pixel_ray(cam, cx, cy).dir);
        out.rgb.at(py, px, 0) = r + transmittance * bg.r;
        out.rgb.at(py, px, 1) = g + transmittance * bg.g;
        out.rgb.at(py, px, 2) = b + transmittance * bg.b;
        out.depth.at(py, px) = wsum > 0.0 ? depth_acc / wsum : 0.0;
        out.opacity.at(py, px) = 1.0 - transmittance;
      }
    }
  });
  return out;
}

}  // namespace fieldsplat
