// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "fieldsplat/image.hpp"
#include "fieldsplat/json_util.hpp"

namespace fieldsplat {

// 10 log10(1 / MSE) over all pixels and channels; +inf for identical images.
inline double psnr(const Image& a, const Image& b) {
  require_same_shape(a, b);
  double sum = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(a.data.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

namespace detail {

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

inline const std::array<double, kSsimWindow>& ssim_kernel() {
  static const std::array<double, kSsimWindow> k = [] {
    std::array<double, kSsimWindow> v{};
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
      const double d = i - (kSsimWindow - 1) / 2.0;
      v[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
      sum += v[i];
    }
    for (double& x : v) x /= sum;
    return v;
  }();
  return k;
}

// Separable valid-mode Gaussian filter of one channel plane.
inline void conv_valid(const std::vector<double>& src, int h, int w, std::vector<double>& dst,
                       std::vector<double>& tmp) {
  const auto& k = ssim_kernel();
  const int vw = w - kSsimWindow + 1;
  const int vh = h - kSsimWindow + 1;
  tmp.assign(static_cast<size_t>(h) * vw, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < vw; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) acc += k[i] * src[static_cast<size_t>(y) * w + x + i];
      tmp[static_cast<size_t>(y) * vw + x] = acc;
    }
  }
  dst.assign(static_cast<size_t>(vh) * vw, 0.0);
  for (int y = 0; y < vh; ++y) {
    for (int x = 0; x < vw; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) acc += k[i] * tmp[static_cast<size_t>(y + i) * vw + x];
      dst[static_cast<size_t>(y) * vw + x] = acc;
    }
  }
}

// Adjoint of conv_valid: scatters a valid-size map back onto the image grid.
inline void conv_valid_adjoint(const std::vector<double>& map, int h, int w,
                               std::vector<double>& dst, std::vector<double>& tmp) {
  const auto& k = ssim_kernel();
  const int vw = w - kSsimWindow + 1;
  const int vh = h - kSsimWindow + 1;
  tmp.assign(static_cast<size_t>(h) * vw, 0.0);
  for (int y = 0; y < vh; ++y) {
    for (int x = 0; x < vw; ++x) {
      const double v = map[static_cast<size_t>(y) * vw + x];
      if (v == 0.0) continue;
      for (int i = 0; i < kSsimWindow; ++i) tmp[static_cast<size_t>(y + i) * vw + x] += k[i] * v;
    }
  }
  dst.assign(static_cast<size_t>(h) * w, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < vw; ++x) {
      const double v = tmp[static_cast<size_t>(y) * vw + x];
      if (v == 0.0) continue;
      for (int i = 0; i < kSsimWindow; ++i) dst[static_cast<size_t>(y) * w + x + i] += k[i] * v;
    }
  }
}

inline void extract_plane(const Image& img, int ch, std::vector<double>& plane) {
  plane.resize(static_cast<size_t>(img.height) * img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      plane[static_cast<size_t>(y) * img.width + x] = img.at(y, x, ch);
    }
  }
}

}  // namespace detail

// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), C1=0.01^2, C2=0.03^2,
// computed per channel on the [0,1] range, averaged over channels and valid
// (non-padded) window positions. When grad_a is non-null it receives
// d(mean ssim)/d(a).
inline double ssim(const Image& a, const Image& b, Image* grad_a = nullptr) {
  require_same_shape(a, b);
  if (a.height < detail::kSsimWindow || a.width < detail::kSsimWindow) {
    throw Error(errc::kTooSmall, "SSIM needs images at least 11x11");
  }
  const int h = a.height, w = a.width;
  const int vh = h - detail::kSsimWindow + 1;
  const int vw = w - detail::kSsimWindow + 1;
  const double norm = 1.0 / (static_cast<double>(vh) * vw * a.channels);

  if (grad_a) *grad_a = Image(h, w, a.channels, 0.0);

  std::vector<double> x, y, xx, yy, xy, mu_x, mu_y, s_xx, s_yy, s_xy, tmp;
  std::vector<double> pa, pb, pc, fold, scratch;
  double total = 0.0;
  for (int ch = 0; ch < a.channels; ++ch) {
    detail::extract_plane(a, ch, x);
    detail::extract_plane(b, ch, y);
    const size_t n = x.size();
    xx.resize(n);
    yy.resize(n);
    xy.resize(n);
    for (size_t i = 0; i < n; ++i) {
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    detail::conv_valid(x, h, w, mu_x, tmp);
    detail::conv_valid(y, h, w, mu_y, tmp);
    detail::conv_valid(xx, h, w, s_xx, tmp);
    detail::conv_valid(yy, h, w, s_yy, tmp);
    detail::conv_valid(xy, h, w, s_xy, tmp);

    if (grad_a) {
      pa.assign(mu_x.size(), 0.0);
      pb.assign(mu_x.size(), 0.0);
      pc.assign(mu_x.size(), 0.0);
    }
    for (size_t i = 0; i < mu_x.size(); ++i) {
      const double mx = mu_x[i], my = mu_y[i];
      const double var_x = s_xx[i] - mx * mx;
      const double var_y = s_yy[i] - my * my;
      const double cov = s_xy[i] - mx * my;
      const double n1 = 2.0 * mx * my + detail::kSsimC1;
      const double n2 = 2.0 * cov + detail::kSsimC2;
      const double d1 = mx * mx + my * my + detail::kSsimC1;
      const double d2 = var_x + var_y + detail::kSsimC2;
      const double s = (n1 * n2) / (d1 * d2);
      total += s;
      if (grad_a) {
        const double ds_dmx = 2.0 * my * n2 / (d1 * d2) - s * 2.0 * mx / d1;
        const double ds_dvarx = -s / d2;
        const double ds_dcov = 2.0 * n1 / (d1 * d2);
        // Through var_x = S_xx - mu_x^2 and cov = S_xy - mu_x mu_y.
        pa[i] = norm * (ds_dmx - 2.0 * mx * ds_dvarx - my * ds_dcov);
        pb[i] = norm * ds_dvarx;  // w.r.t. S_xx
        pc[i] = norm * ds_dcov;   // w.r.t. S_xy
      }
    }
    if (grad_a) {
      detail::conv_valid_adjoint(pa, h, w, fold, scratch);
      for (size_t i = 0; i < n; ++i) {
        grad_a->data[i * a.channels + ch] += fold[i];
      }
      detail::conv_valid_adjoint(pb, h, w, fold, scratch);
      for (size_t i = 0; i < n; ++i) {
        grad_a->data[i * a.channels + ch] += 2.0 * x[i] * fold[i];
      }
      detail::conv_valid_adjoint(pc, h, w, fold, scratch);
      for (size_t i = 0; i < n; ++i) {
        grad_a->data[i * a.channels + ch] += y[i] * fold[i];
      }
    }
  }
  return total * norm;
}

struct ImageMetrics {
  double psnr = 0.0;
  double ssim = 0.0;
  bool psnr_infinite = false;
};

struct MetricReport {
  std::vector<ImageMetrics> per_image;
  double mean_psnr = 0.0;          // over finite entries
  double mean_ssim = 0.0;
  int image_count = 0;
  int infinite_psnr_count = 0;
};

inline MetricReport evaluate(const std::vector<Image>& renders,
                             const std::vector<Image>& references) {
  if (renders.size() != references.size()) {
    throw Error(errc::kShapeMismatch, "render and reference counts differ");
  }
  MetricReport report;
  report.image_count = static_cast<int>(renders.size());
  double psnr_sum = 0.0;
  int psnr_n = 0;
  double ssim_sum = 0.0;
  for (size_t i = 0; i < renders.size(); ++i) {
    ImageMetrics m;
    const double p = psnr(renders[i], references[i]);
    m.psnr_infinite = std::isinf(p);
    m.psnr = p;
    m.ssim = ssim(renders[i], references[i]);
    if (m.psnr_infinite) {
      ++report.infinite_psnr_count;
    } else {
      psnr_sum += p;
      ++psnr_n;
    }
    ssim_sum += m.ssim;
    report.per_image.push_back(m);
  }
  report.mean_psnr = psnr_n > 0 ? psnr_sum / psnr_n : 0.0;
  report.mean_ssim = renders.empty() ? 0.0 : ssim_sum / static_cast<double>(renders.size());
  return report;
}

inline Json metric_report_to_json(const MetricReport& report) {
  Json rows = Json::array();
  for (const ImageMetrics& m : report.per_image) {
    Json row;
    if (m.psnr_infinite) {
      row["psnr"] = nullptr;
      row["psnr_infinite"] = true;
    } else {
      row["psnr"] = m.psnr;
      row["psnr_infinite"] = false;
    }
    row["ssim"] = m.ssim;
    rows.push_back(row);
  }
  return Json{{"per_image", rows},
              {"mean_psnr", report.mean_psnr},
              {"mean_ssim", report.mean_ssim},
              {"image_count", report.image_count},
              {"infinite_psnr_count", report.infinite_psnr_count}};
}

}  // namespace fieldsplat
