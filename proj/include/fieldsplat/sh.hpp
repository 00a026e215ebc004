// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "fieldsplat/geometry.hpp"

namespace fieldsplat {

inline constexpr int kShPerChannel = 16;  // degree 3
inline constexpr int kShTotal = 48;       // 16 per RGB channel, channel-major

// 48 coefficients, channel-major: R0..R15, G0..G15, B0..B15. Band order is
// (0,0), (1,-1), (1,0), (1,1), (2,-2)..(2,2), (3,-3)..(3,3).
using SHCoeffs = std::array<double, kShTotal>;

inline SHCoeffs zero_sh() {
  SHCoeffs c{};
  c.fill(0.0);
  return c;
}

namespace shc {
// L2-normalized real spherical harmonics without the Condon-Shortley phase.
inline constexpr double k0 = 0.28209479177387814;   // 1/(2 sqrt(pi))
inline constexpr double k1 = 0.4886025119029199;    // sqrt(3/(4 pi))
inline constexpr double k2_xy = 1.0925484305920792; // sqrt(15/(4 pi))
inline constexpr double k2_z2 = 0.31539156525252005;
inline constexpr double k2_x2y2 = 0.5462742152960396;
inline constexpr double k3_0 = 0.5900435899266435;
inline constexpr double k3_1 = 2.890611442640554;
inline constexpr double k3_2 = 0.4570457994644658;
inline constexpr double k3_3 = 0.3731763325901154;
inline constexpr double k3_4 = 1.445305721320277;
}  // namespace shc

using SHBasis = std::array<double, kShPerChannel>;

inline SHBasis sh_basis(const Direction& dir) {
  const double x = dir.x(), y = dir.y(), z = dir.z();
  const double xx = x * x, yy = y * y, zz = z * z;
  SHBasis b;
  b[0] = shc::k0;
  b[1] = shc::k1 * y;
  b[2] = shc::k1 * z;
  b[3] = shc::k1 * x;
  b[4] = shc::k2_xy * x * y;
  b[5] = shc::k2_xy * y * z;
  b[6] = shc::k2_z2 * (3.0 * zz - 1.0);
  b[7] = shc::k2_xy * x * z;
  b[8] = shc::k2_x2y2 * (xx - yy);
  b[9] = shc::k3_0 * y * (3.0 * xx - yy);
  b[10] = shc::k3_1 * x * y * z;
  b[11] = shc::k3_2 * y * (5.0 * zz - 1.0);
  b[12] = shc::k3_3 * z * (5.0 * zz - 3.0);
  b[13] = shc::k3_2 * x * (5.0 * zz - 1.0);
  b[14] = shc::k3_4 * z * (xx - yy);
  b[15] = shc::k3_0 * x * (xx - 3.0 * yy);
  return b;
}

// Partial derivatives of each basis value w.r.t. (x,y,z), treating the basis
// polynomials as functions on R^3. Valid on the sphere when combined with the
// tangential projection of the normalization map.
inline void sh_basis_gradient(const Direction& dir, std::array<Vec3, kShPerChannel>& grad) {
  const double x = dir.x(), y = dir.y(), z = dir.z();
  const double xx = x * x, yy = y * y, zz = z * z;
  grad[0] = Vec3::Zero();
  grad[1] = Vec3(0, shc::k1, 0);
  grad[2] = Vec3(0, 0, shc::k1);
  grad[3] = Vec3(shc::k1, 0, 0);
  grad[4] = shc::k2_xy * Vec3(y, x, 0);
  grad[5] = shc::k2_xy * Vec3(0, z, y);
  grad[6] = shc::k2_z2 * Vec3(0, 0, 6.0 * z);
  grad[7] = shc::k2_xy * Vec3(z, 0, x);
  grad[8] = shc::k2_x2y2 * Vec3(2.0 * x, -2.0 * y, 0);
  grad[9] = shc::k3_0 * Vec3(6.0 * x * y, 3.0 * xx - 3.0 * yy, 0);
  grad[10] = shc::k3_1 * Vec3(y * z, x * z, x * y);
  grad[11] = shc::k3_2 * Vec3(0, 5.0 * zz - 1.0, 10.0 * y * z);
  grad[12] = shc::k3_3 * Vec3(0, 0, 15.0 * zz - 3.0);
  grad[13] = shc::k3_2 * Vec3(5.0 * zz - 1.0, 0, 10.0 * x * z);
  grad[14] = shc::k3_4 * Vec3(2.0 * x * z, -2.0 * y * z, xx - yy);
  grad[15] = shc::k3_0 * Vec3(3.0 * xx - 3.0 * yy, -6.0 * x * y, 0);
}

struct Rgb {
  double r = 0.0, g = 0.0, b = 0.0;
  double& operator[](int i) { return (&r)[i]; }
  double operator[](int i) const { return (&r)[i]; }
};

// Raw per-channel SH sums before the +0.5 offset and clamp.
inline Rgb sh_eval_raw(const SHCoeffs& coeffs, const SHBasis& basis) {
  Rgb out;
  for (int ch = 0; ch < 3; ++ch) {
    const double* c = coeffs.data() + ch * kShPerChannel;
    double acc = 0.0;
    for (int k = 0; k < kShPerChannel; ++k) acc += c[k] * basis[k];
    out[ch] = acc;
  }
  return out;
}

// Color = clamp(raw + 0.5, 0, 1). The same mapping is used by the volume
// renderer and the splat rasterizer so coefficients transfer verbatim.
inline Rgb sh_eval(const SHCoeffs& coeffs, const SHBasis& basis) {
  Rgb raw = sh_eval_raw(coeffs, basis);
  Rgb out;
  for (int ch = 0; ch < 3; ++ch) out[ch] = std::clamp(raw[ch] + 0.5, 0.0, 1.0);
  return out;
}

inline Rgb sh_eval(const SHCoeffs& coeffs, const Direction& dir) {
  return sh_eval(coeffs, sh_basis(dir));
}

// 1 where the clamp is inactive (gradient passes), else 0.
inline double sh_clamp_gate(double raw) {
  const double v = raw + 0.5;
  return (v > 0.0 && v < 1.0) ? 1.0 : 0.0;
}

}  // namespace fieldsplat
