// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fieldsplat/geometry.hpp"
#include "fieldsplat/json_util.hpp"
#include "fieldsplat/sh.hpp"

namespace fieldsplat {

// One 3D Gaussian. Scales are stored as logs (exp gives meters), opacity as
// a logit, orientation as a quaternion that is normalized before use.
struct Splat {
  Vec3 position = Vec3::Zero();
  Vec3 log_scale = Vec3::Zero();
  Quaternion rotation = Quaternion::identity();
  double opacity_logit = 0.0;
  SHCoeffs sh = zero_sh();

  double opacity() const { return sigmoid(opacity_logit); }
  Vec3 scale() const { return log_scale.array().exp(); }
};

struct SplatScene {
  std::vector<Splat> splats;
  SHCoeffs background = zero_sh();

  size_t size() const { return splats.size(); }
};

// ---------------------------------------------------------------------------
// Binary PLY in the de-facto splat layout. SH coefficients map channel-major:
// f_dc_ch = sh[ch*16], f_rest_(ch*15 + k-1) = sh[ch*16 + k] for k = 1..15.
// The background SH lives in a "<file>.background.json" sidecar.

namespace detail {

inline std::vector<std::string> splat_ply_properties() {
  std::vector<std::string> props = {"x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2"};
  for (int i = 0; i < 45; ++i) props.push_back("f_rest_" + std::to_string(i));
  props.push_back("opacity");
  for (int i = 0; i < 3; ++i) props.push_back("scale_" + std::to_string(i));
  for (int i = 0; i < 4; ++i) props.push_back("rot_" + std::to_string(i));
  return props;
}

inline void splat_to_floats(const Splat& s, float* out) {
  int i = 0;
  for (int a = 0; a < 3; ++a) out[i++] = static_cast<float>(s.position[a]);
  for (int ch = 0; ch < 3; ++ch) out[i++] = static_cast<float>(s.sh[ch * kShPerChannel]);
  for (int ch = 0; ch < 3; ++ch) {
    for (int k = 1; k < kShPerChannel; ++k) {
      out[i++] = static_cast<float>(s.sh[ch * kShPerChannel + k]);
    }
  }
  out[i++] = static_cast<float>(s.opacity_logit);
  for (int a = 0; a < 3; ++a) out[i++] = static_cast<float>(s.log_scale[a]);
  out[i++] = static_cast<float>(s.rotation.w);
  out[i++] = static_cast<float>(s.rotation.x);
  out[i++] = static_cast<float>(s.rotation.y);
  out[i++] = static_cast<float>(s.rotation.z);
}

}  // namespace detail

inline std::filesystem::path splat_sidecar_path(const std::filesystem::path& ply_path) {
  std::filesystem::path p = ply_path;
  p += ".background.json";
  return p;
}

inline void save_splats(const SplatScene& scene, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(errc::kFileNotFound, "cannot open for writing: " + path.string());
  const auto props = detail::splat_ply_properties();
  os << "ply\nformat binary_little_endian 1.0\n";
  os << "element vertex " << scene.splats.size() << "\n";
  for (const std::string& p : props) os << "property float " << p << "\n";
  os << "end_header\n";
  std::vector<float> row(props.size());
  for (const Splat& s : scene.splats) {
    detail::splat_to_floats(s, row.data());
    os.write(reinterpret_cast<const char*>(row.data()),
             static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!os) throw Error(errc::kFormatError, "PLY write failed: " + path.string());
  Json sidecar;
  sidecar["background_sh"] = sh_to_json(scene.background);
  save_json(sidecar, splat_sidecar_path(path));
}

// Accepts any binary-little-endian PLY whose vertex element carries the splat
// properties as floats; unknown float properties (e.g. normals) are skipped.
// A missing sidecar reads as a zero background so foreign files still load.
inline SplatScene load_splats(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(errc::kFileNotFound, "cannot open: " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != "ply") {
    throw Error(errc::kFormatError, "not a PLY file: " + path.string());
  }
  size_t vertex_count = 0;
  std::vector<std::string> props;
  bool in_vertex = false;
  bool format_ok = false;
  while (std::getline(is, line)) {
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "format") {
      std::string fmt;
      ss >> fmt;
      format_ok = fmt == "binary_little_endian";
    } else if (word == "comment") {
      continue;
    } else if (word == "element") {
      std::string name;
      size_t count = 0;
      ss >> name >> count;
      in_vertex = name == "vertex";
      if (in_vertex) vertex_count = count;
      else if (!props.empty()) break;  // vertex data parsed; later elements unsupported
    } else if (word == "property") {
      std::string type, name;
      ss >> type >> name;
      if (in_vertex) {
        if (type != "float") {
          throw Error(errc::kFormatError, "splat PLY expects float properties");
        }
        props.push_back(name);
      }
    } else if (word == "end_header") {
      break;
    }
  }
  if (!format_ok) throw Error(errc::kFormatError, "PLY must be binary_little_endian");
  std::map<std::string, int> index;
  for (size_t i = 0; i < props.size(); ++i) index[props[i]] = static_cast<int>(i);
  const auto need = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) {
      throw Error(errc::kFormatError, "PLY missing property " + name);
    }
    return it->second;
  };
  const auto expected = detail::splat_ply_properties();
  std::vector<int> slots(expected.size());
  for (size_t i = 0; i < expected.size(); ++i) slots[i] = need(expected[i]);

  SplatScene scene;
  scene.splats.resize(vertex_count);
  std::vector<float> row(props.size());
  for (size_t v = 0; v < vertex_count; ++v) {
    is.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!is) throw Error(errc::kFormatError, "PLY truncated: " + path.string());
    Splat& s = scene.splats[v];
    int i = 0;
    for (int a = 0; a < 3; ++a) s.position[a] = row[slots[i++]];
    double dc[3];
    for (int ch = 0; ch < 3; ++ch) dc[ch] = row[slots[i++]];
    for (int ch = 0; ch < 3; ++ch) {
      s.sh[ch * kShPerChannel] = dc[ch];
      for (int k = 1; k < kShPerChannel; ++k) {
        s.sh[ch * kShPerChannel + k] = row[slots[i++]];
      }
    }
    s.opacity_logit = row[slots[i++]];
    for (int a = 0; a < 3; ++a) s.log_scale[a] = row[slots[i++]];
    s.rotation.w = row[slots[i++]];
    s.rotation.x = row[slots[i++]];
    s.rotation.y = row[slots[i++]];
    s.rotation.z = row[slots[i++]];
  }
  const auto sidecar = splat_sidecar_path(path);
  if (std::filesystem::exists(sidecar)) {
    const Json j = load_json(sidecar);
    reject_unknown_keys(j, {"background_sh"}, sidecar.string());
    scene.background = sh_from_json(require_key(j, "background_sh", sidecar.string()),
                                    "background_sh");
  }
  return scene;
}

}  // namespace fieldsplat
