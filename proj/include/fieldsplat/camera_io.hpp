// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <set>
#include <string>
#include <vector>

#include "fieldsplat/camera.hpp"
#include "fieldsplat/json_util.hpp"

namespace fieldsplat {

// One posed frame of a dataset: the pose is world-from-camera with -z
// forward, and `split` tags it as a train or validation view.
struct CameraFrame {
  std::string file_path;
  std::string split;  // "train" or "val"
  Camera camera;
};

struct CameraFile {
  std::vector<CameraFrame> frames;

  std::vector<Camera> cameras(const std::string& split = "") const {
    std::vector<Camera> out;
    for (const CameraFrame& f : frames) {
      if (split.empty() || f.split == split) out.push_back(f.camera);
    }
    return out;
  }

  std::vector<std::string> paths(const std::string& split = "") const {
    std::vector<std::string> out;
    for (const CameraFrame& f : frames) {
      if (split.empty() || f.split == split) out.push_back(f.file_path);
    }
    return out;
  }
};

inline Json camera_frame_to_json(const CameraFrame& frame) {
  Json t = Json::array();
  for (int r = 0; r < 4; ++r) {
    Json row = Json::array();
    for (int c = 0; c < 4; ++c) row.push_back(frame.camera.pose(r, c));
    t.push_back(row);
  }
  return Json{{"file_path", frame.file_path},
              {"split", frame.split},
              {"transform_matrix", t},
              {"fl_x", frame.camera.fx},
              {"fl_y", frame.camera.fy},
              {"cx", frame.camera.cx},
              {"cy", frame.camera.cy},
              {"w", frame.camera.width},
              {"h", frame.camera.height}};
}

inline CameraFrame camera_frame_from_json(const Json& j, const std::string& where) {
  reject_unknown_keys(
      j, {"file_path", "split", "transform_matrix", "fl_x", "fl_y", "cx", "cy", "w", "h"}, where);
  CameraFrame frame;
  frame.file_path = require_key(j, "file_path", where).get<std::string>();
  frame.split = require_key(j, "split", where).get<std::string>();
  if (frame.split != "train" && frame.split != "val") {
    throw Error(errc::kSchemaError, where + ": split must be \"train\" or \"val\"");
  }
  const Json& t = require_key(j, "transform_matrix", where);
  if (!t.is_array() || t.size() != 4) {
    throw Error(errc::kSchemaError, where + ": transform_matrix must be 4x4");
  }
  Mat4 pose;
  for (int r = 0; r < 4; ++r) {
    if (!t[r].is_array() || t[r].size() != 4) {
      throw Error(errc::kSchemaError, where + ": transform_matrix must be 4x4");
    }
    for (int c = 0; c < 4; ++c) pose(r, c) = t[r][c].get<double>();
  }
  // Camera construction enforces the pose and intrinsics invariants.
  frame.camera = Camera(require_key(j, "fl_x", where).get<double>(),
                        require_key(j, "fl_y", where).get<double>(),
                        require_key(j, "cx", where).get<double>(),
                        require_key(j, "cy", where).get<double>(),
                        require_key(j, "w", where).get<int>(),
                        require_key(j, "h", where).get<int>(), pose);
  return frame;
}

inline void save_camera_file(const CameraFile& file, const std::filesystem::path& path) {
  Json j;
  j["frames"] = Json::array();
  for (const CameraFrame& f : file.frames) j["frames"].push_back(camera_frame_to_json(f));
  save_json(j, path);
}

inline CameraFile load_camera_file(const std::filesystem::path& path) {
  const Json j = load_json(path);
  reject_unknown_keys(j, {"frames"}, path.string());
  CameraFile file;
  std::set<std::string> seen;
  int i = 0;
  for (const Json& f : require_key(j, "frames", path.string())) {
    CameraFrame frame = camera_frame_from_json(f, path.string() + "#" + std::to_string(i++));
    if (!seen.insert(frame.file_path).second) {
      throw Error(errc::kSchemaError, "duplicate file_path: " + frame.file_path);
    }
    file.frames.push_back(std::move(frame));
  }
  return file;
}

}  // namespace fieldsplat
