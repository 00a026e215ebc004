// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fieldsplat/json_util.hpp"
#include "fieldsplat/volume_render.hpp"

namespace fieldsplat {

// Closed-form primitive soup used as ground truth. Overlapping primitives add
// densities; their SH blend by density weight.
struct Primitive {
  enum class Shape { kSphere, kBox };
  Shape shape = Shape::kSphere;
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
  Vec3 box_min = Vec3::Zero();
  Vec3 box_max = Vec3::Zero();
  double density = 0.0;
  SHCoeffs sh = zero_sh();

  static Primitive sphere(const Vec3& center, double radius, double density,
                          const SHCoeffs& sh) {
    Primitive p;
    p.shape = Shape::kSphere;
    p.center = center;
    p.radius = radius;
    p.density = density;
    p.sh = sh;
    return p;
  }

  static Primitive box(const Vec3& mn, const Vec3& mx, double density, const SHCoeffs& sh) {
    Primitive p;
    p.shape = Shape::kBox;
    p.box_min = mn;
    p.box_max = mx;
    p.density = density;
    p.sh = sh;
    return p;
  }

  bool contains(const Vec3& p) const {
    if (shape == Shape::kSphere) return (p - center).squaredNorm() <= radius * radius;
    return p.x() >= box_min.x() && p.x() <= box_max.x() && p.y() >= box_min.y() &&
           p.y() <= box_max.y() && p.z() >= box_min.z() && p.z() <= box_max.z();
  }
};

struct AnalyticScene {
  std::vector<Primitive> primitives;
  SHCoeffs background = zero_sh();
  // Canonical field bounds for baking and training against this scene.
  Vec3 bbox_min = Vec3(-1, -1, -1);
  Vec3 bbox_max = Vec3(1, 1, 1);
};

inline void oracle_query(const AnalyticScene& scene, const Vec3& p, double& density,
                         SHCoeffs& sh) {
  density = 0.0;
  sh.fill(0.0);
  for (const Primitive& prim : scene.primitives) {
    if (prim.density <= 0.0 || !prim.contains(p)) continue;
    density += prim.density;
    for (int k = 0; k < kShTotal; ++k) sh[k] += prim.density * prim.sh[k];
  }
  if (density > 0.0) {
    for (int k = 0; k < kShTotal; ++k) sh[k] /= density;
  }
}

namespace detail {

// Entry/exit of a ray through one primitive, clipped to [t_near, t_far].
inline bool primitive_interval(const Primitive& prim, const Ray& ray, double& t0, double& t1) {
  if (prim.shape == Primitive::Shape::kSphere) {
    const Vec3 oc = ray.origin - prim.center;
    const double b = oc.dot(ray.dir.vec());
    const double c = oc.squaredNorm() - prim.radius * prim.radius;
    const double disc = b * b - c;
    if (disc <= 0.0) return false;
    const double s = std::sqrt(disc);
    t0 = -b - s;
    t1 = -b + s;
  } else {
    t0 = ray.t_near;
    t1 = ray.t_far;
    for (int a = 0; a < 3; ++a) {
      const double o = ray.origin[a];
      const double d = ray.dir.vec()[a];
      if (d == 0.0) {
        if (o < prim.box_min[a] || o > prim.box_max[a]) return false;
        continue;
      }
      double ta = (prim.box_min[a] - o) / d;
      double tb = (prim.box_max[a] - o) / d;
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
    }
  }
  t0 = std::max(t0, ray.t_near);
  t1 = std::min(t1, ray.t_far);
  return t0 < t1;
}

}  // namespace detail

// Exact transmittance render: the medium is piecewise constant between
// primitive boundary crossings, so each elementary interval integrates in
// closed form. The median depth is solved analytically inside its interval.
inline RayRender oracle_render_ray_exact(const AnalyticScene& scene, const Ray& ray) {
  const SHBasis basis = sh_basis(ray.dir);
  std::vector<double> bounds;
  bounds.reserve(scene.primitives.size() * 2);
  for (const Primitive& prim : scene.primitives) {
    double t0, t1;
    if (detail::primitive_interval(prim, ray, t0, t1)) {
      bounds.push_back(t0);
      bounds.push_back(t1);
    }
  }
  RayRender out;
  std::sort(bounds.begin(), bounds.end());

  struct Interval {
    double a, b, density, weight;
    double t_in;  // transmittance entering the interval
  };
  std::vector<Interval> intervals;
  double transmittance = 1.0;
  Rgb rgb;
  double total_w = 0.0;
  SHCoeffs sh;
  for (size_t i = 0; i + 1 < bounds.size(); ++i) {
    const double a = bounds[i];
    const double b = bounds[i + 1];
    if (!(b > a)) continue;
    double density = 0.0;
    oracle_query(scene, ray.at(0.5 * (a + b)), density, sh);
    if (density <= 0.0) continue;
    const double alpha = 1.0 - std::exp(-density * (b - a));
    const double w = transmittance * alpha;
    const Rgb c = sh_eval(sh, basis);
    rgb.r += w * c.r;
    rgb.g += w * c.g;
    rgb.b += w * c.b;
    intervals.push_back({a, b, density, w, transmittance});
    total_w += w;
    transmittance *= 1.0 - alpha;
  }
  out.opacity = total_w;
  out.transmittance = transmittance;
  if (total_w > 0.0) {
    const double target = 0.5 * total_w;
    double cum = 0.0;
    for (const Interval& iv : intervals) {
      if (cum + iv.weight >= target) {
        const double frac = (target - cum) / iv.t_in;
        out.median_depth = iv.a - std::log(1.0 - frac) / iv.density;
        break;
      }
      cum += iv.weight;
    }
  }
  const Rgb bg = sh_eval(scene.background, basis);
  out.rgb.r = rgb.r + transmittance * bg.r;
  out.rgb.g = rgb.g + transmittance * bg.g;
  out.rgb.b = rgb.b + transmittance * bg.b;
  return out;
}

// Scene extent for quadrature clipping; primitives plus a small margin.
inline std::pair<Vec3, Vec3> scene_extent(const AnalyticScene& scene) {
  Vec3 mn = scene.bbox_min, mx = scene.bbox_max;
  for (const Primitive& p : scene.primitives) {
    if (p.shape == Primitive::Shape::kSphere) {
      mn = mn.cwiseMin(p.center - Vec3::Constant(p.radius));
      mx = mx.cwiseMax(p.center + Vec3::Constant(p.radius));
    } else {
      mn = mn.cwiseMin(p.box_min);
      mx = mx.cwiseMax(p.box_max);
    }
  }
  return {mn, mx};
}

inline RayRender oracle_render_ray_quadrature(const AnalyticScene& scene, const Ray& ray,
                                              const VolumeRenderOptions& opt,
                                              uint64_t element = 0) {
  const auto [mn, mx] = scene_extent(scene);
  return render_ray_quadrature(
      [&scene](const Vec3& p, double& density, SHCoeffs& sh) {
        oracle_query(scene, p, density, sh);
      },
      ray, scene.background, mn, mx, opt, element);
}

enum class OracleMode { kExact, kQuadrature };

inline RenderOutput oracle_render(const AnalyticScene& scene, const Camera& cam,
                                  OracleMode mode = OracleMode::kExact, int n_samples = 8192) {
  RenderOutput out(cam.height, cam.width);
  VolumeRenderOptions opt;
  opt.n_samples = n_samples;
  parallel_rows(static_cast<size_t>(cam.height), [&](size_t y) {
    for (int x = 0; x < cam.width; ++x) {
      const Ray ray = pixel_ray(cam, x + 0.5, y + 0.5);
      const RayRender r =
          mode == OracleMode::kExact
              ? oracle_render_ray_exact(scene, ray)
              : oracle_render_ray_quadrature(scene, ray, opt,
                                             static_cast<uint64_t>(y) * cam.width + x);
      out.rgb.at(static_cast<int>(y), x, 0) = r.rgb.r;
      out.rgb.at(static_cast<int>(y), x, 1) = r.rgb.g;
      out.rgb.at(static_cast<int>(y), x, 2) = r.rgb.b;
      out.depth.at(static_cast<int>(y), x) = r.median_depth;
      out.opacity.at(static_cast<int>(y), x) = r.opacity;
    }
  });
  return out;
}

// Samples the oracle at voxel centers. Density is clamped to 1e-6 before the
// softplus inversion so empty space stays representable.
inline VoxelField bake_field(const AnalyticScene& scene, int nx, int ny, int nz) {
  VoxelField f(scene.bbox_min, scene.bbox_max, nx, ny, nz);
  parallel_chunks(static_cast<size_t>(nz), 1, [&](size_t iz, size_t, size_t) {
    SHCoeffs sh;
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        double density = 0.0;
        oracle_query(scene, f.voxel_center(ix, iy, static_cast<int>(iz)), density, sh);
        const size_t idx = f.voxel_index(ix, iy, static_cast<int>(iz));
        f.raw_density[idx] = inverse_softplus(std::max(density, 1e-6));
        std::copy(sh.begin(), sh.end(), f.sh.begin() + idx * kShTotal);
      }
    }
  });
  f.background = scene.background;
  return f;
}

// ---------------------------------------------------------------------------
// Scene JSON

inline Json primitive_to_json(const Primitive& p) {
  Json j;
  if (p.shape == Primitive::Shape::kSphere) {
    j["type"] = "sphere";
    j["center"] = vec3_to_json(p.center);
    j["radius"] = p.radius;
  } else {
    j["type"] = "box";
    j["min"] = vec3_to_json(p.box_min);
    j["max"] = vec3_to_json(p.box_max);
  }
  j["density"] = p.density;
  j["sh"] = sh_to_json(p.sh);
  return j;
}

inline Primitive primitive_from_json(const Json& j) {
  const std::string type = require_key(j, "type", "primitive").get<std::string>();
  const double density = require_key(j, "density", "primitive").get<double>();
  const SHCoeffs sh = sh_from_json(require_key(j, "sh", "primitive"), "primitive.sh");
  if (density < 0.0 || !std::isfinite(density)) {
    throw Error(errc::kSchemaError, "primitive density must be finite and nonnegative");
  }
  if (type == "sphere") {
    reject_unknown_keys(j, {"type", "center", "radius", "density", "sh"}, "primitive");
    return Primitive::sphere(vec3_from_json(require_key(j, "center", "primitive"), "center"),
                             require_key(j, "radius", "primitive").get<double>(), density, sh);
  }
  if (type == "box") {
    reject_unknown_keys(j, {"type", "min", "max", "density", "sh"}, "primitive");
    return Primitive::box(vec3_from_json(require_key(j, "min", "primitive"), "min"),
                          vec3_from_json(require_key(j, "max", "primitive"), "max"), density, sh);
  }
  throw Error(errc::kSchemaError, "unknown primitive type: " + type);
}

inline Json scene_to_json(const AnalyticScene& scene) {
  Json j;
  j["primitives"] = Json::array();
  for (const Primitive& p : scene.primitives) j["primitives"].push_back(primitive_to_json(p));
  j["background_sh"] = sh_to_json(scene.background);
  j["bbox_min"] = vec3_to_json(scene.bbox_min);
  j["bbox_max"] = vec3_to_json(scene.bbox_max);
  return j;
}

inline AnalyticScene scene_from_json(const Json& j) {
  reject_unknown_keys(j, {"primitives", "background_sh", "bbox_min", "bbox_max"}, "scene");
  AnalyticScene scene;
  for (const Json& p : require_key(j, "primitives", "scene")) {
    scene.primitives.push_back(primitive_from_json(p));
  }
  scene.background = sh_from_json(require_key(j, "background_sh", "scene"), "background_sh");
  scene.bbox_min = vec3_from_json(require_key(j, "bbox_min", "scene"), "bbox_min");
  scene.bbox_max = vec3_from_json(require_key(j, "bbox_max", "scene"), "bbox_max");
  return scene;
}

}  // namespace fieldsplat
