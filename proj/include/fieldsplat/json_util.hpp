// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "fieldsplat/error.hpp"
#include "fieldsplat/geometry.hpp"
#include "fieldsplat/sh.hpp"

namespace fieldsplat {

using Json = nlohmann::json;

inline Json load_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(errc::kFileNotFound, "cannot open: " + path.string());
  try {
    return Json::parse(is);
  } catch (const std::exception& e) {
    throw Error(errc::kParseError, path.string() + ": " + e.what());
  }
}

inline void save_json(const Json& j, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(errc::kFileNotFound, "cannot open for writing: " + path.string());
  os << j.dump(2) << "\n";
}

// Strict-schema helper: every document key must be one of `allowed`.
inline void reject_unknown_keys(const Json& j, const std::set<std::string>& allowed,
                                const std::string& where) {
  if (!j.is_object()) throw Error(errc::kSchemaError, where + ": expected an object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw Error(errc::kSchemaError, where + ": unknown key \"" + item.key() + "\"");
    }
  }
}

inline const Json& require_key(const Json& j, const std::string& key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(errc::kSchemaError, where + ": missing key \"" + key + "\"");
  return *it;
}

inline Vec3 vec3_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(errc::kSchemaError, where + ": expected an array of 3 numbers");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

inline Json vec3_to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

inline SHCoeffs sh_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != kShTotal) {
    throw Error(errc::kSchemaError, where + ": expected an array of 48 numbers");
  }
  SHCoeffs c;
  for (int i = 0; i < kShTotal; ++i) c[i] = j[i].get<double>();
  return c;
}

inline Json sh_to_json(const SHCoeffs& c) {
  Json j = Json::array();
  for (double v : c) j.push_back(v);
  return j;
}

}  // namespace fieldsplat
