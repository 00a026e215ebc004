// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "fieldsplat/error.hpp"
#include "fieldsplat/parallel.hpp"

namespace fieldsplat {

// Adam with bias correction. eps defaults to 1e-15, the aggressive value
// common in radiance-field trainers.
class Adam {
 public:
  explicit Adam(size_t n, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-15)
      : beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

  size_t size() const { return m_.size(); }

  // One update over params[0..n). Elementwise, so the parallel schedule
  // cannot change results.
  void step(double* params, const double* grads, double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    parallel_chunks(m_.size(), 65536, [&](size_t begin, size_t end, size_t) {
      for (size_t i = begin; i < end; ++i) {
        const double g = grads[i];
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
        const double mhat = m_[i] / bc1;
        const double vhat = v_[i] / bc2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + eps_);
      }
    });
  }

  void step(std::vector<double>& params, const std::vector<double>& grads, double lr) {
    if (params.size() != m_.size() || grads.size() != m_.size()) {
      throw Error(errc::kShapeMismatch, "optimizer state does not match parameter count");
    }
    step(params.data(), grads.data(), lr);
  }

 private:
  double beta1_, beta2_, eps_;
  long long t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace fieldsplat
