// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "fieldsplat/sh.hpp"
#include "test_support.hpp"

namespace fieldsplat {
namespace {

// Monte-Carlo orthonormality over the sphere: (4pi/N) sum b_i b_j -> delta_ij.
// This is the independent oracle for the basis constants and band layout.
TEST(ShBasis, MonteCarloOrthonormality) {
  constexpr int kSamples = 1'000'000;
  SeededRng rng(42);
  std::array<std::array<double, kShPerChannel>, kShPerChannel> gram{};
  for (int n = 0; n < kSamples; ++n) {
    const SHBasis b = sh_basis(Direction(test::random_direction(rng)));
    for (int i = 0; i < kShPerChannel; ++i) {
      for (int j = i; j < kShPerChannel; ++j) {
        gram[i][j] += b[i] * b[j];
      }
    }
  }
  const double scale = 4.0 * M_PI / kSamples;
  for (int i = 0; i < kShPerChannel; ++i) {
    for (int j = i; j < kShPerChannel; ++j) {
      const double expected = i == j ? 1.0 : 0.0;
      EXPECT_NEAR(gram[i][j] * scale, expected, 2e-2) << "pair " << i << "," << j;
    }
  }
}

TEST(ShBasis, ClosedFormValues) {
  const SHBasis b_any = sh_basis(Direction(0.3, -0.5, 0.7));
  EXPECT_NEAR(b_any[0], 0.28209479, 1e-8);
  EXPECT_EQ(b_any.size(), 16u);

  const SHBasis b_z = sh_basis(Direction(0.0, 0.0, 1.0));
  EXPECT_NEAR(b_z[1], 0.0, 1e-12);
  EXPECT_NEAR(b_z[2], 0.48860251, 1e-8);
  EXPECT_NEAR(b_z[3], 0.0, 1e-12);
}

TEST(ShBasis, GradientMatchesFiniteDifferences) {
  SeededRng rng(7);
  const double eps = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 d = test::random_direction(rng);
    std::array<Vec3, kShPerChannel> grad;
    sh_basis_gradient(Direction(d), grad);
    for (int a = 0; a < 3; ++a) {
      Vec3 dp = d, dm = d;
      dp[a] += eps;
      dm[a] -= eps;
      // Compare against the polynomial extension off the sphere: evaluate the
      // same closed forms without renormalizing.
      auto poly = [](const Vec3& v) {
        SHBasis b;
        const double x = v.x(), y = v.y(), z = v.z();
        const double xx = x * x, yy = y * y, zz = z * z;
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
      };
      const SHBasis bp = poly(dp);
      const SHBasis bm = poly(dm);
      for (int k = 0; k < kShPerChannel; ++k) {
        EXPECT_NEAR(grad[k][a], (bp[k] - bm[k]) / (2.0 * eps), 1e-6);
      }
    }
  }
}

TEST(ShEval, ZeroCoefficientsGiveMidGray) {
  const Rgb c = sh_eval(zero_sh(), Direction(0.1, 0.9, -0.4));
  EXPECT_DOUBLE_EQ(c.r, 0.5);
  EXPECT_DOUBLE_EQ(c.g, 0.5);
  EXPECT_DOUBLE_EQ(c.b, 0.5);
}

TEST(ShEval, DcTermSaturatesRedAtClampBoundary) {
  SHCoeffs coeffs = zero_sh();
  coeffs[0] = 0.5 / 0.28209479;
  const Rgb c = sh_eval(coeffs, Direction(0.0, 1.0, 0.0));
  EXPECT_NEAR(c.r, 1.0, 1e-7);
  EXPECT_DOUBLE_EQ(c.g, 0.5);
  EXPECT_DOUBLE_EQ(c.b, 0.5);
}

TEST(ShEval, DcOnlyCoefficientsAreViewIndependent) {
  SHCoeffs coeffs = zero_sh();
  coeffs[0] = 0.3;
  coeffs[16] = -0.2;
  coeffs[32] = 0.1;
  const Rgb ref = sh_eval(coeffs, Direction(1.0, 0.0, 0.0));
  SeededRng rng(3);
  for (int i = 0; i < 100; ++i) {
    const Rgb c = sh_eval(coeffs, Direction(test::random_direction(rng)));
    EXPECT_DOUBLE_EQ(c.r, ref.r);
    EXPECT_DOUBLE_EQ(c.g, ref.g);
    EXPECT_DOUBLE_EQ(c.b, ref.b);
  }
}

// Linearity in the coefficients holds whenever the clamp is inactive.
TEST(ShEval, LinearBeforeClamp) {
  SeededRng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    SHCoeffs c1, c2, mix;
    for (int k = 0; k < kShTotal; ++k) {
      c1[k] = 0.05 * (rng.next_unit() - 0.5);
      c2[k] = 0.05 * (rng.next_unit() - 0.5);
    }
    const double a = rng.next_unit(), b = rng.next_unit();
    for (int k = 0; k < kShTotal; ++k) mix[k] = a * c1[k] + b * c2[k];
    const Direction dir(test::random_direction(rng));
    const Rgb e1 = sh_eval(c1, dir);
    const Rgb e2 = sh_eval(c2, dir);
    const Rgb em = sh_eval(mix, dir);
    for (int ch = 0; ch < 3; ++ch) {
      EXPECT_NEAR(em[ch] - 0.5, a * (e1[ch] - 0.5) + b * (e2[ch] - 0.5), 1e-12);
    }
  }
}

}  // namespace
}  // namespace fieldsplat
