// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "fieldsplat/geometry.hpp"
#include "test_support.hpp"

namespace fieldsplat {
namespace {

TEST(Direction, NormalizesAndRejectsZero) {
  const Direction d(3.0, 0.0, 4.0);
  EXPECT_NEAR(d.vec().norm(), 1.0, 1e-15);
  EXPECT_NEAR(d.x(), 0.6, 1e-15);
  EXPECT_THROW(Direction(0.0, 0.0, 0.0), Error);
  EXPECT_THROW(Direction(std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0), Error);
}

TEST(Quaternion, IdentityMapsToIdentity) {
  EXPECT_TRUE(quat_to_matrix(Quaternion::identity()).isApprox(Mat3::Identity(), 1e-15));
}

TEST(Quaternion, NinetyDegreesAboutZ) {
  const double c = std::cos(M_PI / 4.0), s = std::sin(M_PI / 4.0);
  const Mat3 r = quat_to_matrix({c, 0.0, 0.0, s});
  Mat3 expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  EXPECT_TRUE(r.isApprox(expected, 1e-12));
}

TEST(Quaternion, RandomUnitQuaternionsGiveOrthogonalMatrices) {
  SeededRng rng(5);
  for (int i = 0; i < 100; ++i) {
    Quaternion q{rng.next_unit() - 0.5, rng.next_unit() - 0.5, rng.next_unit() - 0.5,
                 rng.next_unit() - 0.5};
    q = q.normalized();
    const Mat3 m = quat_to_matrix(q);
    EXPECT_LT((m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(m.determinant(), 1.0, 1e-12);
  }
}

TEST(Quaternion, NonUnitRejected) {
  EXPECT_THROW(quat_to_matrix({1.1, 0.0, 0.0, 0.0}), Error);
  try {
    quat_to_matrix({0.5, 0.5, 0.0, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::kNonUnitQuaternion);
  }
}

// The backward map must contract like the true Jacobian of the polynomial
// quaternion-to-matrix formula.
TEST(Quaternion, RotationMatrixBackwardMatchesFiniteDifferences) {
  SeededRng rng(17);
  const double eps = 1e-6;
  for (int trial = 0; trial < 30; ++trial) {
    Quaternion q{rng.next_unit() - 0.5, rng.next_unit() - 0.5, rng.next_unit() - 0.5,
                 rng.next_unit() - 0.5};
    q = q.normalized();
    Mat3 g;
    for (int i = 0; i < 9; ++i) g(i / 3, i % 3) = rng.next_unit() - 0.5;
    const auto grad = rotation_matrix_backward(q, g);
    double* comps[4];
    Quaternion qp = q;
    comps[0] = &qp.w;
    comps[1] = &qp.x;
    comps[2] = &qp.y;
    comps[3] = &qp.z;
    for (int a = 0; a < 4; ++a) {
      qp = q;
      *comps[a] += eps;
      const Mat3 rp = rotation_matrix(qp);
      qp = q;
      *comps[a] -= eps;
      const Mat3 rm = rotation_matrix(qp);
      const double fd = ((rp - rm) / (2.0 * eps)).cwiseProduct(g).sum();
      EXPECT_NEAR(grad[a], fd, 1e-6);
    }
  }
}

TEST(Activations, SoftplusInverseRoundTrip) {
  for (double y : {1e-6, 0.01, 0.5, 2.0, 40.0}) {
    EXPECT_NEAR(softplus(inverse_softplus(y)), y, 1e-12 * std::max(1.0, y));
  }
  EXPECT_NEAR(softplus_derivative(0.0), 0.5, 1e-15);
  EXPECT_NEAR(sigmoid(logit(0.25)), 0.25, 1e-12);
}

}  // namespace
}  // namespace fieldsplat
