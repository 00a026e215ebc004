// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "fieldsplat/error.hpp"

namespace fieldsplat {

// Row-major, channel-fastest image of doubles in linear space.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  Image() = default;
  Image(int h, int w, int c, double fill = 0.0)
      : height(h), width(w), channels(c), data(static_cast<size_t>(h) * w * c, fill) {}

  double& at(int y, int x, int c = 0) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c = 0) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }

  size_t size() const { return data.size(); }
  bool same_shape(const Image& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
};

inline void require_same_shape(const Image& a, const Image& b) {
  if (!a.same_shape(b)) {
    throw Error(errc::kShapeMismatch, "images have different shapes");
  }
}

// Output of both renderers: rgb in [0,1], depth in meters (0 where the ray
// saw nothing), opacity = 1 - final transmittance.
struct RenderOutput {
  Image rgb;      // H x W x 3
  Image depth;    // H x W x 1
  Image opacity;  // H x W x 1

  RenderOutput() = default;
  RenderOutput(int h, int w) : rgb(h, w, 3), depth(h, w, 1), opacity(h, w, 1) {}
};

}  // namespace fieldsplat
