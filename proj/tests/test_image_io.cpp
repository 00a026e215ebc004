// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "fieldsplat/image_io.hpp"
#include "fieldsplat/rng.hpp"

namespace fieldsplat {
namespace {

class ImageIoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() / "fieldsplat_imageio";
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(ImageIoTest, SrgbTransferInverts) {
  for (double v = 0.0; v <= 1.0; v += 0.01) {
    EXPECT_NEAR(srgb_to_linear(linear_to_srgb(v)), v, 1e-12);
  }
}

TEST_F(ImageIoTest, PngRoundTripWithinQuantization) {
  SeededRng rng(31);
  Image img(24, 17, 3);
  for (double& v : img.data) v = rng.next_unit();
  const auto path = dir_ / "t.png";
  save_png(img, path);
  const Image back = load_png(path);
  ASSERT_TRUE(back.same_shape(img));
  double max_err = 0.0;
  for (size_t i = 0; i < img.data.size(); ++i) {
    max_err = std::max(max_err, std::abs(img.data[i] - back.data[i]));
  }
  EXPECT_LT(max_err, 0.006);  // half an 8-bit sRGB step in linear terms

  // A second write of the decoded image is byte-identical (stable encode).
  const auto path2 = dir_ / "t2.png";
  save_png(back, path2);
  const Image back2 = load_png(path2);
  EXPECT_EQ(back.data, back2.data);
}

TEST_F(ImageIoTest, GrayPng) {
  Image img(8, 8, 1);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) img.at(y, x) = (y * 8 + x) / 63.0;
  }
  const auto path = dir_ / "gray.png";
  save_png(img, path);
  const Image back = load_png(path);
  EXPECT_EQ(back.channels, 1);
  EXPECT_NEAR(back.at(7, 7), 1.0, 1e-12);
}

TEST_F(ImageIoTest, PfmRoundTripIsFloatExact) {
  SeededRng rng(32);
  Image depth(13, 9, 1);
  for (double& v : depth.data) v = 10.0 * rng.next_unit();
  const auto path = dir_ / "d.pfm";
  save_pfm(depth, path);
  const Image back = load_pfm(path);
  ASSERT_TRUE(back.same_shape(depth));
  for (size_t i = 0; i < depth.data.size(); ++i) {
    EXPECT_EQ(back.data[i], static_cast<double>(static_cast<float>(depth.data[i])));
  }
}

TEST_F(ImageIoTest, MissingFilesRaiseFileNotFound) {
  try {
    load_png(dir_ / "missing.png");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::kFileNotFound);
  }
  EXPECT_THROW(load_pfm(dir_ / "missing.pfm"), Error);
}

}  // namespace
}  // namespace fieldsplat
