// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>

#include "fieldsplat/error.hpp"

namespace fieldsplat {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;

// Unit direction vector. The constructor normalizes, so downstream code can
// rely on |d| = 1 without re-checking.
class Direction {
 public:
  Direction(double x, double y, double z) : Direction(Vec3(x, y, z)) {}

  explicit Direction(const Vec3& v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw Error(errc::kInvalidArgument, "direction must be a finite nonzero vector");
    }
    d_ = v / n;
  }

  double x() const { return d_.x(); }
  double y() const { return d_.y(); }
  double z() const { return d_.z(); }
  const Vec3& vec() const { return d_; }

 private:
  Vec3 d_;
};

struct Quaternion {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  static Quaternion identity() { return {1.0, 0.0, 0.0, 0.0}; }

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

  Quaternion normalized() const {
    const double n = norm();
    if (!(n > 0.0)) {
      throw Error(errc::kNonUnitQuaternion, "cannot normalize zero quaternion");
    }
    return {w / n, x / n, y / n, z / n};
  }
};

// Rotation matrix of a quaternion assumed unit; no tolerance check.
inline Mat3 rotation_matrix(const Quaternion& q) {
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  Mat3 m;
  m << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return m;
}

inline Mat3 quat_to_matrix(const Quaternion& q) {
  if (std::abs(q.norm() - 1.0) > 1e-6) {
    throw Error(errc::kNonUnitQuaternion, "quaternion norm deviates from 1 by more than 1e-6");
  }
  return rotation_matrix(q);
}

// d(R)/d(q) for the unnormalized quaternion-to-matrix map above. Contracts a
// gradient w.r.t. the rotation matrix into a gradient w.r.t. (w,x,y,z).
inline std::array<double, 4> rotation_matrix_backward(const Quaternion& q, const Mat3& grad_r) {
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  Mat3 dw, dx, dy, dz;
  dw << 0, -2 * z, 2 * y,
      2 * z, 0, -2 * x,
      -2 * y, 2 * x, 0;
  dx << 0, 2 * y, 2 * z,
      2 * y, -4 * x, -2 * w,
      2 * z, 2 * w, -4 * x;
  dy << -4 * y, 2 * x, 2 * w,
      2 * x, 0, 2 * z,
      -2 * w, 2 * z, -4 * y;
  dz << -4 * z, -2 * w, 2 * x,
      2 * w, -4 * z, 2 * y,
      2 * x, 2 * y, 0;
  return {grad_r.cwiseProduct(dw).sum(), grad_r.cwiseProduct(dx).sum(),
          grad_r.cwiseProduct(dy).sum(), grad_r.cwiseProduct(dz).sum()};
}

inline double softplus(double x) {
  // log1p(exp(x)) with the large-x branch to avoid overflow.
  return x > 30.0 ? x : std::log1p(std::exp(x));
}

inline double softplus_derivative(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double inverse_softplus(double y) {
  // Inverse of softplus for y > 0.
  return y > 30.0 ? y : std::log(std::expm1(y));
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace fieldsplat
