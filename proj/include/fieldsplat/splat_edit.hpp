// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <set>
#include <variant>
#include <vector>

#include "fieldsplat/splat.hpp"

namespace fieldsplat {

// Selection regions: axis-aligned box, sphere, or an explicit id list.
struct BoxRegion {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
};

struct SphereRegion {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

struct IdRegion {
  std::vector<size_t> ids;
};

using Region = std::variant<BoxRegion, SphereRegion, IdRegion>;

// Ids of splats whose position lies inside the region (closed boundaries).
// Ids stay valid until the next structural change of the scene.
inline std::vector<size_t> select_splats(const SplatScene& scene, const Region& region) {
  std::vector<size_t> out;
  if (const auto* box = std::get_if<BoxRegion>(&region)) {
    if (!(box->min.x() < box->max.x() && box->min.y() < box->max.y() &&
          box->min.z() < box->max.z())) {
      throw Error(errc::kMalformedRegion, "box region needs min < max componentwise");
    }
    for (size_t i = 0; i < scene.splats.size(); ++i) {
      const Vec3& p = scene.splats[i].position;
      if (p.x() >= box->min.x() && p.x() <= box->max.x() && p.y() >= box->min.y() &&
          p.y() <= box->max.y() && p.z() >= box->min.z() && p.z() <= box->max.z()) {
        out.push_back(i);
      }
    }
  } else if (const auto* sphere = std::get_if<SphereRegion>(&region)) {
    if (!(sphere->radius > 0.0)) {
      throw Error(errc::kMalformedRegion, "sphere region needs radius > 0");
    }
    const double r2 = sphere->radius * sphere->radius;
    for (size_t i = 0; i < scene.splats.size(); ++i) {
      if ((scene.splats[i].position - sphere->center).squaredNorm() <= r2) {
        out.push_back(i);
      }
    }
  } else {
    const auto& ids = std::get<IdRegion>(region).ids;
    std::set<size_t> seen;
    for (size_t id : ids) {
      if (id >= scene.splats.size() || !seen.insert(id).second) {
        throw Error(errc::kMalformedRegion, "id region has out-of-range or duplicate ids");
      }
    }
    out = ids;
  }
  return out;
}

// New scene without the given splats; surviving order is preserved.
inline SplatScene remove_splats(const SplatScene& scene, const std::vector<size_t>& ids) {
  std::set<size_t> to_remove;
  for (size_t id : ids) {
    if (id >= scene.splats.size() || !to_remove.insert(id).second) {
      throw Error(errc::kUnknownId, "remove_splats ids must be valid and unique");
    }
  }
  SplatScene out;
  out.background = scene.background;
  out.splats.reserve(scene.splats.size() - to_remove.size());
  for (size_t i = 0; i < scene.splats.size(); ++i) {
    if (!to_remove.count(i)) out.splats.push_back(scene.splats[i]);
  }
  return out;
}

}  // namespace fieldsplat
