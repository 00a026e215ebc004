// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fieldsplat/camera.hpp"
#include "fieldsplat/json_util.hpp"

namespace fieldsplat {

struct Intrinsics {
  double fl_x = 0.0, fl_y = 0.0, cx = 0.0, cy = 0.0;
  int width = 0, height = 0;
};

// Camera pose with -z looking along `forward` and +y as close to `up` as the
// constraint allows.
inline Mat4 look_at_pose(const Vec3& eye, const Vec3& forward, const Vec3& up) {
  const double fn = forward.norm();
  if (!(fn > 0.0)) throw Error(errc::kDegenerateSpec, "zero gaze direction");
  const Vec3 f = forward / fn;
  Vec3 right = f.cross(up);
  const double rn = right.norm();
  if (rn < 1e-9) throw Error(errc::kDegenerateSpec, "gaze parallel to up vector");
  right /= rn;
  const Vec3 cam_z = -f;
  const Vec3 cam_y = cam_z.cross(right);
  Mat4 pose = Mat4::Identity();
  pose.block<3, 1>(0, 0) = right;
  pose.block<3, 1>(0, 1) = cam_y;
  pose.block<3, 1>(0, 2) = cam_z;
  pose.block<3, 1>(0, 3) = eye;
  return pose;
}

// Generators for the three benchmark view layouts:
//  - orbit: cameras on a circle, gazing at the center (easy validation);
//  - corridor: ego-centric walk along a segment, gazing along the path;
//  - opposite_side: the corridor shifted to the far side of the scene and
//    walked the other way with reversed gaze (hard validation).
struct TrajectorySpec {
  enum class Kind { kOrbit, kCorridor, kOppositeSide };
  Kind kind = Kind::kOrbit;
  int count = 0;
  Intrinsics intrinsics;
  Vec3 up = Vec3(0, 0, 1);
  // orbit
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
  double height = 0.0;
  // corridor; for opposite_side these are the *train* path endpoints
  Vec3 start = Vec3::Zero();
  Vec3 end = Vec3::Zero();
  double lateral_offset = 0.0;
};

inline std::vector<Camera> make_trajectory(const TrajectorySpec& spec) {
  if (spec.count < 1) throw Error(errc::kDegenerateSpec, "trajectory needs count >= 1");
  const Intrinsics& in = spec.intrinsics;
  std::vector<Camera> cams;
  cams.reserve(spec.count);
  auto emit = [&](const Vec3& eye, const Vec3& forward) {
    cams.emplace_back(in.fl_x, in.fl_y, in.cx, in.cy, in.width, in.height,
                      look_at_pose(eye, forward, spec.up));
  };
  switch (spec.kind) {
    case TrajectorySpec::Kind::kOrbit: {
      if (!(spec.radius > 0.0)) throw Error(errc::kDegenerateSpec, "orbit radius must be > 0");
      for (int k = 0; k < spec.count; ++k) {
        const double theta = 2.0 * M_PI * k / spec.count;
        const Vec3 eye = spec.center + Vec3(spec.radius * std::cos(theta),
                                            spec.radius * std::sin(theta), spec.height);
        emit(eye, spec.center - eye);
      }
      break;
    }
    case TrajectorySpec::Kind::kCorridor: {
      const Vec3 f = spec.end - spec.start;
      if (!(f.norm() > 0.0)) throw Error(errc::kDegenerateSpec, "corridor has zero length");
      for (int k = 0; k < spec.count; ++k) {
        const double s = spec.count > 1 ? static_cast<double>(k) / (spec.count - 1) : 0.0;
        emit(spec.start + s * f, f);
      }
      break;
    }
    case TrajectorySpec::Kind::kOppositeSide: {
      const Vec3 f = spec.end - spec.start;
      if (!(f.norm() > 0.0)) throw Error(errc::kDegenerateSpec, "corridor has zero length");
      Vec3 left = spec.up.cross(f);
      if (left.norm() < 1e-9) throw Error(errc::kDegenerateSpec, "path parallel to up vector");
      left.normalize();
      const Vec3 offset = spec.lateral_offset * left;
      // Walk the far-side path in the opposite direction, gazing back.
      for (int k = 0; k < spec.count; ++k) {
        const double s = spec.count > 1 ? static_cast<double>(k) / (spec.count - 1) : 0.0;
        emit(spec.end + offset + s * (spec.start - spec.end), -f);
      }
      break;
    }
  }
  return cams;
}

// ---------------------------------------------------------------------------
// JSON

inline std::string trajectory_kind_name(TrajectorySpec::Kind k) {
  switch (k) {
    case TrajectorySpec::Kind::kOrbit: return "orbit";
    case TrajectorySpec::Kind::kCorridor: return "corridor";
    case TrajectorySpec::Kind::kOppositeSide: return "opposite_side";
  }
  return "orbit";
}

inline Json intrinsics_to_json(const Intrinsics& in) {
  return Json{{"fl_x", in.fl_x}, {"fl_y", in.fl_y}, {"cx", in.cx},
              {"cy", in.cy},     {"w", in.width},   {"h", in.height}};
}

inline Intrinsics intrinsics_from_json(const Json& j, const std::string& where) {
  reject_unknown_keys(j, {"fl_x", "fl_y", "cx", "cy", "w", "h"}, where);
  Intrinsics in;
  in.fl_x = require_key(j, "fl_x", where).get<double>();
  in.fl_y = require_key(j, "fl_y", where).get<double>();
  in.cx = require_key(j, "cx", where).get<double>();
  in.cy = require_key(j, "cy", where).get<double>();
  in.width = require_key(j, "w", where).get<int>();
  in.height = require_key(j, "h", where).get<int>();
  return in;
}

inline Json trajectory_to_json(const TrajectorySpec& spec) {
  Json j;
  j["kind"] = trajectory_kind_name(spec.kind);
  j["count"] = spec.count;
  j["intrinsics"] = intrinsics_to_json(spec.intrinsics);
  j["up"] = vec3_to_json(spec.up);
  switch (spec.kind) {
    case TrajectorySpec::Kind::kOrbit:
      j["center"] = vec3_to_json(spec.center);
      j["radius"] = spec.radius;
      j["height"] = spec.height;
      break;
    case TrajectorySpec::Kind::kCorridor:
      j["start"] = vec3_to_json(spec.start);
      j["end"] = vec3_to_json(spec.end);
      break;
    case TrajectorySpec::Kind::kOppositeSide:
      j["start"] = vec3_to_json(spec.start);
      j["end"] = vec3_to_json(spec.end);
      j["lateral_offset"] = spec.lateral_offset;
      break;
  }
  return j;
}

inline TrajectorySpec trajectory_from_json(const Json& j, const std::string& where) {
  TrajectorySpec spec;
  const std::string kind = require_key(j, "kind", where).get<std::string>();
  spec.count = require_key(j, "count", where).get<int>();
  spec.intrinsics = intrinsics_from_json(require_key(j, "intrinsics", where), where);
  if (j.contains("up")) spec.up = vec3_from_json(j["up"], where + ".up");
  if (kind == "orbit") {
    reject_unknown_keys(j, {"kind", "count", "intrinsics", "up", "center", "radius", "height"},
                        where);
    spec.kind = TrajectorySpec::Kind::kOrbit;
    spec.center = vec3_from_json(require_key(j, "center", where), where + ".center");
    spec.radius = require_key(j, "radius", where).get<double>();
    if (j.contains("height")) spec.height = j["height"].get<double>();
  } else if (kind == "corridor" || kind == "opposite_side") {
    reject_unknown_keys(j, {"kind", "count", "intrinsics", "up", "start", "end", "lateral_offset"},
                        where);
    spec.kind = kind == "corridor" ? TrajectorySpec::Kind::kCorridor
                                   : TrajectorySpec::Kind::kOppositeSide;
    spec.start = vec3_from_json(require_key(j, "start", where), where + ".start");
    spec.end = vec3_from_json(require_key(j, "end", where), where + ".end");
    if (spec.kind == TrajectorySpec::Kind::kOppositeSide) {
      spec.lateral_offset = require_key(j, "lateral_offset", where).get<double>();
    }
  } else {
    throw Error(errc::kSchemaError, where + ": unknown trajectory kind \"" + kind + "\"");
  }
  return spec;
}

}  // namespace fieldsplat
