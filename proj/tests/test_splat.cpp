// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "fieldsplat/splat.hpp"
#include "test_support.hpp"

namespace fieldsplat {
namespace {

SplatScene random_scene_for_io(uint64_t seed, size_t n) {
  SplatScene scene;
  SeededRng rng(seed);
  for (size_t i = 0; i < n; ++i) {
    Splat s;
    for (int a = 0; a < 3; ++a) {
      s.position[a] = 4.0 * (rng.next_unit() - 0.5);
      s.log_scale[a] = -3.0 + rng.next_unit();
    }
    Quaternion q{rng.next_unit() - 0.5, rng.next_unit() - 0.5, rng.next_unit() - 0.5,
                 rng.next_unit() - 0.5};
    s.rotation = q.normalized();
    s.opacity_logit = 4.0 * (rng.next_unit() - 0.5);
    for (double& v : s.sh) v = rng.next_unit() - 0.5;
    scene.splats.push_back(s);
  }
  for (double& v : scene.background) v = 0.3 * (rng.next_unit() - 0.5);
  return scene;
}

TEST(SplatPly, FileLevelRoundTripIsBitwise) {
  const auto dir = std::filesystem::temp_directory_path() / "fieldsplat_ply";
  std::filesystem::create_directories(dir);
  const SplatScene scene = random_scene_for_io(3, 57);
  const auto p1 = dir / "a.ply";
  const auto p2 = dir / "b.ply";
  save_splats(scene, p1);
  const SplatScene loaded = load_splats(p1);
  ASSERT_EQ(loaded.splats.size(), scene.splats.size());
  save_splats(loaded, p2);
  for (const auto& pair : {std::pair(p1, p2)}) {
    std::ifstream f1(pair.first, std::ios::binary), f2(pair.second, std::ios::binary);
    const std::vector<char> b1((std::istreambuf_iterator<char>(f1)),
                               std::istreambuf_iterator<char>());
    const std::vector<char> b2((std::istreambuf_iterator<char>(f2)),
                               std::istreambuf_iterator<char>());
    EXPECT_EQ(b1, b2);
  }
  // Sidecar carries the background; JSON round-trips doubles exactly.
  for (int k = 0; k < kShTotal; ++k) {
    EXPECT_EQ(loaded.background[k], scene.background[k]);
  }
  std::filesystem::remove_all(dir);
}

TEST(SplatPly, HeaderListsTheSplatLayout) {
  const auto dir = std::filesystem::temp_directory_path() / "fieldsplat_ply_hdr";
  std::filesystem::create_directories(dir);
  const auto path = dir / "h.ply";
  save_splats(random_scene_for_io(5, 2), path);
  std::ifstream is(path, std::ios::binary);
  std::string header(2048, '\0');
  is.read(header.data(), 2048);
  EXPECT_NE(header.find("format binary_little_endian 1.0"), std::string::npos);
  EXPECT_NE(header.find("element vertex 2"), std::string::npos);
  EXPECT_NE(header.find("property float f_dc_0"), std::string::npos);
  EXPECT_NE(header.find("property float f_rest_44"), std::string::npos);
  EXPECT_NE(header.find("property float rot_3"), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(SplatPly, ShChannelMappingMatchesTheDeFactoLayout) {
  const auto dir = std::filesystem::temp_directory_path() / "fieldsplat_ply_map";
  std::filesystem::create_directories(dir);
  SplatScene scene;
  Splat s;
  for (int k = 0; k < kShTotal; ++k) s.sh[k] = k;
  scene.splats.push_back(s);
  const auto path = dir / "m.ply";
  save_splats(scene, path);

  std::ifstream is(path, std::ios::binary);
  std::string line;
  while (std::getline(is, line) && line != "end_header") {
  }
  std::vector<float> row(59);
  is.read(reinterpret_cast<char*>(row.data()), 59 * sizeof(float));
  // x y z, then f_dc = sh[0], sh[16], sh[32].
  EXPECT_EQ(row[3], 0.0f);
  EXPECT_EQ(row[4], 16.0f);
  EXPECT_EQ(row[5], 32.0f);
  // f_rest_0..14 = R channel coefficients 1..15.
  EXPECT_EQ(row[6], 1.0f);
  EXPECT_EQ(row[20], 15.0f);
  // f_rest_15 = G channel coefficient 1.
  EXPECT_EQ(row[21], 17.0f);
  std::filesystem::remove_all(dir);
}

TEST(SplatPly, MissingFileAndForeignFormatRejected) {
  const auto dir = std::filesystem::temp_directory_path() / "fieldsplat_ply_bad";
  std::filesystem::create_directories(dir);
  EXPECT_THROW(load_splats(dir / "missing.ply"), Error);
  std::ofstream(dir / "ascii.ply") << "ply\nformat ascii 1.0\nelement vertex 0\nend_header\n";
  EXPECT_THROW(load_splats(dir / "ascii.ply"), Error);
  std::filesystem::remove_all(dir);
}

TEST(Splat, AccessorsApplyActivations) {
  Splat s;
  s.log_scale = Vec3(std::log(0.5), std::log(2.0), 0.0);
  s.opacity_logit = 0.0;
  EXPECT_NEAR(s.scale().x(), 0.5, 1e-12);
  EXPECT_NEAR(s.scale().y(), 2.0, 1e-12);
  EXPECT_NEAR(s.opacity(), 0.5, 1e-12);
}

}  // namespace
}  // namespace fieldsplat
