// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "fieldsplat/error.hpp"
#include "fieldsplat/geometry.hpp"
#include "fieldsplat/sh.hpp"

namespace fieldsplat {

// Dense voxel grid of (pre-activation density, 48 SH coefficients) plus a
// direction-dependent SH background. Voxel centers sit at
// bbox_min + (i + 0.5) * cell; values are stored x-fastest, SH coefficients
// contiguous per voxel.
struct VoxelField {
  Vec3 bbox_min = Vec3::Zero();
  Vec3 bbox_max = Vec3::Ones();
  int nx = 0, ny = 0, nz = 0;
  std::vector<double> raw_density;
  std::vector<double> sh;
  SHCoeffs background = zero_sh();

  VoxelField() = default;
  VoxelField(const Vec3& bmin, const Vec3& bmax, int nx_, int ny_, int nz_,
             double raw_density_init = 0.0)
      : bbox_min(bmin), bbox_max(bmax), nx(nx_), ny(ny_), nz(nz_) {
    if (nx <= 0 || ny <= 0 || nz <= 0) {
      throw Error(errc::kInvalidArgument, "voxel dims must be positive");
    }
    if (!(bmin.x() < bmax.x() && bmin.y() < bmax.y() && bmin.z() < bmax.z())) {
      throw Error(errc::kInvalidArgument, "bbox_min must be below bbox_max componentwise");
    }
    raw_density.assign(voxel_count(), raw_density_init);
    sh.assign(voxel_count() * kShTotal, 0.0);
  }

  size_t voxel_count() const {
    return static_cast<size_t>(nx) * static_cast<size_t>(ny) * static_cast<size_t>(nz);
  }

  Vec3 cell_size() const {
    return Vec3((bbox_max.x() - bbox_min.x()) / nx, (bbox_max.y() - bbox_min.y()) / ny,
                (bbox_max.z() - bbox_min.z()) / nz);
  }

  size_t voxel_index(int ix, int iy, int iz) const {
    return (static_cast<size_t>(iz) * ny + iy) * nx + ix;
  }

  Vec3 voxel_center(int ix, int iy, int iz) const {
    const Vec3 cell = cell_size();
    return bbox_min + Vec3((ix + 0.5) * cell.x(), (iy + 0.5) * cell.y(), (iz + 0.5) * cell.z());
  }

  bool contains(const Vec3& p) const {
    return p.x() >= bbox_min.x() && p.x() <= bbox_max.x() && p.y() >= bbox_min.y() &&
           p.y() <= bbox_max.y() && p.z() >= bbox_min.z() && p.z() <= bbox_max.z();
  }
};

// The 8-corner interpolation stencil for a point. Clamp-to-edge inside the
// bbox; points outside the bbox carry no stencil at all.
struct TrilinearStencil {
  bool inside = false;
  size_t corner[8] = {};
  double weight[8] = {};
};

inline TrilinearStencil trilinear_stencil(const VoxelField& f, const Vec3& p) {
  TrilinearStencil s;
  if (!f.contains(p)) return s;
  s.inside = true;
  const Vec3 cell = f.cell_size();
  int i0[3], i1[3];
  double frac[3];
  const int dims[3] = {f.nx, f.ny, f.nz};
  for (int a = 0; a < 3; ++a) {
    const double u = (p[a] - f.bbox_min[a]) / cell[a] - 0.5;
    int lo = static_cast<int>(std::floor(u));
    double fr = u - lo;
    if (lo < 0) {
      lo = 0;
      fr = 0.0;
    } else if (lo >= dims[a] - 1) {
      lo = dims[a] - 1;
      fr = 0.0;
    }
    i0[a] = lo;
    i1[a] = std::min(lo + 1, dims[a] - 1);
    frac[a] = fr;
  }
  int c = 0;
  for (int dz = 0; dz < 2; ++dz) {
    for (int dy = 0; dy < 2; ++dy) {
      for (int dx = 0; dx < 2; ++dx, ++c) {
        const int ix = dx ? i1[0] : i0[0];
        const int iy = dy ? i1[1] : i0[1];
        const int iz = dz ? i1[2] : i0[2];
        s.corner[c] = f.voxel_index(ix, iy, iz);
        s.weight[c] = (dx ? frac[0] : 1.0 - frac[0]) * (dy ? frac[1] : 1.0 - frac[1]) *
                      (dz ? frac[2] : 1.0 - frac[2]);
      }
    }
  }
  return s;
}

inline double interpolate_raw_density(const VoxelField& f, const TrilinearStencil& s) {
  double acc = 0.0;
  for (int c = 0; c < 8; ++c) acc += s.weight[c] * f.raw_density[s.corner[c]];
  return acc;
}

inline void interpolate_sh(const VoxelField& f, const TrilinearStencil& s, SHCoeffs& out) {
  out.fill(0.0);
  for (int c = 0; c < 8; ++c) {
    const double w = s.weight[c];
    if (w == 0.0) continue;
    const double* src = f.sh.data() + s.corner[c] * kShTotal;
    for (int k = 0; k < kShTotal; ++k) out[k] += w * src[k];
  }
}

// Activated density and SH at a world point; zero outside the bbox.
inline double sample_density(const VoxelField& f, const Vec3& p) {
  const TrilinearStencil s = trilinear_stencil(f, p);
  if (!s.inside) return 0.0;
  return softplus(interpolate_raw_density(f, s));
}

inline void sample_field(const VoxelField& f, const Vec3& p, double& density, SHCoeffs& sh) {
  const TrilinearStencil s = trilinear_stencil(f, p);
  if (!s.inside) {
    density = 0.0;
    sh.fill(0.0);
    return;
  }
  density = softplus(interpolate_raw_density(f, s));
  interpolate_sh(f, s, sh);
}

// ---------------------------------------------------------------------------
// VXF1 checkpoint: little-endian, magic "VXF1", dims (3 x u32),
// bbox (6 x f64), raw_density (f32, x-fastest), sh (f32, coefficient-fastest),
// background (48 x f32).

namespace detail {

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error(errc::kFormatError, "unexpected end of file");
  return v;
}

inline void write_f32_array(std::ostream& os, const std::vector<double>& v) {
  std::vector<float> buf(v.begin(), v.end());
  os.write(reinterpret_cast<const char*>(buf.data()),
           static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

inline void read_f32_array(std::istream& is, std::vector<double>& v, size_t n) {
  std::vector<float> buf(n);
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * sizeof(float)));
  if (!is) throw Error(errc::kFormatError, "unexpected end of file");
  v.assign(buf.begin(), buf.end());
}

}  // namespace detail

inline void save_field(const VoxelField& f, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(errc::kFileNotFound, "cannot open for writing: " + path.string());
  os.write("VXF1", 4);
  detail::write_pod<uint32_t>(os, static_cast<uint32_t>(f.nx));
  detail::write_pod<uint32_t>(os, static_cast<uint32_t>(f.ny));
  detail::write_pod<uint32_t>(os, static_cast<uint32_t>(f.nz));
  for (int a = 0; a < 3; ++a) detail::write_pod<double>(os, f.bbox_min[a]);
  for (int a = 0; a < 3; ++a) detail::write_pod<double>(os, f.bbox_max[a]);
  detail::write_f32_array(os, f.raw_density);
  detail::write_f32_array(os, f.sh);
  for (double v : f.background) detail::write_pod<float>(os, static_cast<float>(v));
  if (!os) throw Error(errc::kFormatError, "write failed: " + path.string());
}

inline VoxelField load_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(errc::kFileNotFound, "cannot open: " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "VXF1", 4) != 0) {
    throw Error(errc::kFormatError, "not a VXF1 checkpoint: " + path.string());
  }
  const auto nx = detail::read_pod<uint32_t>(is);
  const auto ny = detail::read_pod<uint32_t>(is);
  const auto nz = detail::read_pod<uint32_t>(is);
  Vec3 bmin, bmax;
  for (int a = 0; a < 3; ++a) bmin[a] = detail::read_pod<double>(is);
  for (int a = 0; a < 3; ++a) bmax[a] = detail::read_pod<double>(is);
  VoxelField f(bmin, bmax, static_cast<int>(nx), static_cast<int>(ny), static_cast<int>(nz));
  detail::read_f32_array(is, f.raw_density, f.voxel_count());
  detail::read_f32_array(is, f.sh, f.voxel_count() * kShTotal);
  for (double& v : f.background) v = detail::read_pod<float>(is);
  return f;
}

}  // namespace fieldsplat
