// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <vector>

#include "fieldsplat/rasterize.hpp"

namespace fieldsplat {

struct SplatGradients {
  std::vector<Vec3> position;
  std::vector<Vec3> log_scale;
  std::vector<std::array<double, 4>> rotation;  // w, x, y, z
  std::vector<double> opacity_logit;
  std::vector<SHCoeffs> sh;
  SHCoeffs background = zero_sh();

  void resize(size_t n) {
    position.assign(n, Vec3::Zero());
    log_scale.assign(n, Vec3::Zero());
    rotation.assign(n, {0.0, 0.0, 0.0, 0.0});
    opacity_logit.assign(n, 0.0);
    sh.assign(n, zero_sh());
    background.fill(0.0);
  }
};

namespace detail {

// Per-splat accumulators in screen space, gathered over pixels before the
// projection chain converts them to parameter gradients.
struct ScreenGrad {
  double mean_x = 0.0, mean_y = 0.0;
  double q_aa = 0.0, q_ab = 0.0, q_bb = 0.0;  // grad w.r.t. conic as [[aa,ab],[ab,bb]]
  double opacity = 0.0;                       // grad w.r.t. sigmoid(opacity_logit)
  double color[3] = {0.0, 0.0, 0.0};          // grad w.r.t. clamped color
};

struct Contribution {
  uint32_t list_index;
  double alpha;
  double g;  // exp(-m/2)
  double transmittance_before;
  double dx, dy;
};

// Converts screen-space accumulators of one splat into parameter gradients.
inline void projection_chain(const Splat& splat, const Camera& cam, const ScreenGrad& sg,
                             Vec3& g_position, Vec3& g_log_scale, std::array<double, 4>& g_quat,
                             double& g_opacity_logit, SHCoeffs& g_sh) {
  const ProjectionDetail d = project_detail(splat, cam);
  g_position = Vec3::Zero();
  g_log_scale = Vec3::Zero();
  g_quat = {0.0, 0.0, 0.0, 0.0};
  g_opacity_logit = 0.0;
  g_sh.fill(0.0);
  if (d.culled || d.singular) return;

  const double o = splat.opacity();
  g_opacity_logit = sg.opacity * o * (1.0 - o);

  // conic = cov2d^-1.
  Mat2 g_conic;
  g_conic << sg.q_aa, sg.q_ab, sg.q_ab, sg.q_bb;
  const Mat2 g_cov = -d.conic * g_conic * d.conic;

  // cov2d = A sigma_world A^T + dilation.
  const Eigen::Matrix<double, 2, 3> A = d.J * d.W;
  const Mat3 g_sigma = A.transpose() * g_cov * A;
  const Eigen::Matrix<double, 2, 3> g_A = 2.0 * g_cov * A * d.sigma_world;
  const Eigen::Matrix<double, 2, 3> g_J = g_A * d.W.transpose();

  // sigma_world = M M^T with M = R S.
  const Mat3 M = d.R * d.scale.asDiagonal();
  const Mat3 g_M = 2.0 * g_sigma * M;
  const Mat3 g_R = g_M * d.scale.asDiagonal();
  const Vec3 g_scale_exp = (d.R.transpose() * g_M).diagonal();
  g_log_scale = g_scale_exp.cwiseProduct(d.scale);

  const Quaternion qn = splat.rotation.normalized();
  const std::array<double, 4> g_qhat = rotation_matrix_backward(qn, g_R);
  const double raw_norm = splat.rotation.norm();
  const double dot = g_qhat[0] * qn.w + g_qhat[1] * qn.x + g_qhat[2] * qn.y + g_qhat[3] * qn.z;
  const double qhat[4] = {qn.w, qn.x, qn.y, qn.z};
  for (int i = 0; i < 4; ++i) g_quat[i] = (g_qhat[i] - qhat[i] * dot) / raw_norm;

  // position via mean2d and the Jacobian's dependence on the camera point.
  Vec3 g_pcam = d.J.transpose() * Vec2(sg.mean_x, sg.mean_y);
  const double x = d.p_cam.x(), y = d.p_cam.y(), z = d.p_cam.z();
  const double iz = 1.0 / z;
  const double iz2 = iz * iz, iz3 = iz2 * iz;
  g_pcam.x() += g_J(0, 2) * cam.fx * iz2;
  g_pcam.y() += g_J(1, 2) * (-cam.fy * iz2);
  g_pcam.z() += g_J(0, 0) * cam.fx * iz2 + g_J(0, 2) * (-2.0 * cam.fx * x * iz3) +
                g_J(1, 1) * (-cam.fy * iz2) + g_J(1, 2) * (2.0 * cam.fy * y * iz3);
  g_position = d.W.transpose() * g_pcam;

  // color: SH coefficients directly, and position through the view direction.
  double gate_grad[3];
  for (int ch = 0; ch < 3; ++ch) {
    gate_grad[ch] = sg.color[ch] * sh_clamp_gate(d.color_raw[ch]);
    for (int k = 0; k < kShPerChannel; ++k) {
      g_sh[ch * kShPerChannel + k] = gate_grad[ch] * d.basis[k];
    }
  }
  if (gate_grad[0] != 0.0 || gate_grad[1] != 0.0 || gate_grad[2] != 0.0) {
    std::array<Vec3, kShPerChannel> bgrad;
    sh_basis_gradient(Direction(d.dir), bgrad);
    Vec3 v = Vec3::Zero();
    for (int ch = 0; ch < 3; ++ch) {
      if (gate_grad[ch] == 0.0) continue;
      Vec3 vc = Vec3::Zero();
      for (int k = 0; k < kShPerChannel; ++k) {
        vc += splat.sh[ch * kShPerChannel + k] * bgrad[k];
      }
      v += gate_grad[ch] * vc;
    }
    g_position += (v - d.dir * d.dir.dot(v)) / d.dist;
  }
}

}  // namespace detail

// Analytic gradients of rasterize() w.r.t. every splat field and the
// background, given d(loss)/d(rgb) per pixel. Culled splats and splats fully
// hidden behind the transmittance stop get zero gradients. Tile partial sums
// are merged in tile order, so results do not depend on the thread count.
inline void rasterize_backward(const SplatScene& scene, const Camera& cam, const Image& grad_rgb,
                               SplatGradients& grads) {
  if (grad_rgb.height != cam.height || grad_rgb.width != cam.width || grad_rgb.channels != 3) {
    throw Error(errc::kShapeMismatch, "grad_rgb shape does not match camera");
  }
  grads.resize(scene.splats.size());
  const detail::PreparedScene prep = detail::prepare_scene(scene, cam);
  const size_t n_tiles = prep.tile_lists.size();

  std::vector<std::vector<detail::ScreenGrad>> tile_grads(n_tiles);
  std::vector<SHCoeffs> tile_bg(n_tiles, zero_sh());

  parallel_chunks(n_tiles, 1, [&](size_t tile, size_t, size_t) {
    const std::vector<uint32_t>& list = prep.tile_lists[tile];
    std::vector<detail::ScreenGrad>& acc = tile_grads[tile];
    acc.assign(list.size(), detail::ScreenGrad{});
    SHCoeffs& bg_acc = tile_bg[tile];
    const int tx = static_cast<int>(tile) % prep.tiles_x;
    const int ty = static_cast<int>(tile) / prep.tiles_x;
    const int px0 = tx * kTileSize;
    const int py0 = ty * kTileSize;
    const int px1 = std::min(cam.width, px0 + kTileSize);
    const int py1 = std::min(cam.height, py0 + kTileSize);

    thread_local std::vector<detail::Contribution> contribs;
    for (int py = py0; py < py1; ++py) {
      for (int px = px0; px < px1; ++px) {
        const double cx = px + 0.5, cy = py + 0.5;
        const double gpix[3] = {grad_rgb.at(py, px, 0), grad_rgb.at(py, px, 1),
                                grad_rgb.at(py, px, 2)};

        // Forward replay for this pixel.
        contribs.clear();
        double transmittance = 1.0;
        for (uint32_t li = 0; li < list.size(); ++li) {
          const detail::PreparedSplat& s = prep.splats[list[li]];
          const double dx = cx - s.mean_x;
          const double dy = cy - s.mean_y;
          const double m =
              s.conic_a * dx * dx + 2.0 * s.conic_b * dx * dy + s.conic_c * dy * dy;
          if (m < 0.0) continue;
          const double g = std::exp(-0.5 * m);
          double alpha = s.opacity * g;
          if (alpha < kAlphaCutoff) continue;
          alpha = std::min(alpha, kAlphaClamp);
          contribs.push_back({li, alpha, g, transmittance, dx, dy});
          transmittance *= 1.0 - alpha;
          if (transmittance < kTransmittanceStop) break;
        }

        // Background gradient through the final transmittance.
        const Direction pix_dir = pixel_ray(cam, cx, cy).dir;
        const SHBasis pix_basis = sh_basis(pix_dir);
        const Rgb bg_raw = sh_eval_raw(scene.background, pix_basis);
        Rgb bg;
        double suffix[3];
        for (int ch = 0; ch < 3; ++ch) {
          bg[ch] = std::clamp(bg_raw[ch] + 0.5, 0.0, 1.0);
          const double f = gpix[ch] * transmittance * sh_clamp_gate(bg_raw[ch]);
          if (f != 0.0) {
            for (int k = 0; k < kShPerChannel; ++k) {
              bg_acc[ch * kShPerChannel + k] += f * pix_basis[k];
            }
          }
          suffix[ch] = transmittance * bg[ch];
        }

        // Back-to-front: suffix holds sum_{j>k} w_j c_j + T_fin * bg.
        for (size_t i = contribs.size(); i-- > 0;) {
          const detail::Contribution& c = contribs[i];
          const detail::PreparedSplat& s = prep.splats[c.list_index];
          detail::ScreenGrad& sg = acc[c.list_index];
          const double w = c.transmittance_before * c.alpha;
          for (int ch = 0; ch < 3; ++ch) sg.color[ch] += gpix[ch] * w;

          const bool clamped = s.opacity * c.g >= kAlphaClamp;
          if (!clamped) {
            double grad_alpha = 0.0;
            for (int ch = 0; ch < 3; ++ch) {
              grad_alpha += gpix[ch] * (c.transmittance_before * s.color[ch] -
                                        suffix[ch] / (1.0 - c.alpha));
            }
            sg.opacity += grad_alpha * c.g;
            const double grad_m = -0.5 * grad_alpha * c.alpha;
            const double qd_x = s.conic_a * c.dx + s.conic_b * c.dy;
            const double qd_y = s.conic_b * c.dx + s.conic_c * c.dy;
            sg.mean_x += grad_m * (-2.0 * qd_x);
            sg.mean_y += grad_m * (-2.0 * qd_y);
            sg.q_aa += grad_m * c.dx * c.dx;
            sg.q_ab += grad_m * c.dx * c.dy;
            sg.q_bb += grad_m * c.dy * c.dy;
          }
          suffix[0] += w * s.color.r;
          suffix[1] += w * s.color.g;
          suffix[2] += w * s.color.b;
        }
      }
    }
  });

  // Merge tile partials in tile order.
  std::vector<detail::ScreenGrad> merged(prep.splats.size());
  for (size_t tile = 0; tile < n_tiles; ++tile) {
    const std::vector<uint32_t>& list = prep.tile_lists[tile];
    for (size_t li = 0; li < list.size(); ++li) {
      const detail::ScreenGrad& src = tile_grads[tile][li];
      detail::ScreenGrad& dst = merged[list[li]];
      dst.mean_x += src.mean_x;
      dst.mean_y += src.mean_y;
      dst.q_aa += src.q_aa;
      dst.q_ab += src.q_ab;
      dst.q_bb += src.q_bb;
      dst.opacity += src.opacity;
      for (int ch = 0; ch < 3; ++ch) dst.color[ch] += src.color[ch];
    }
    for (int k = 0; k < kShTotal; ++k) grads.background[k] += tile_bg[tile][k];
  }

  // Projection chain per surviving splat; slots are disjoint by id.
  parallel_chunks(prep.splats.size(), 64, [&](size_t begin, size_t end, size_t) {
    for (size_t i = begin; i < end; ++i) {
      const uint32_t id = prep.splats[i].id;
      detail::projection_chain(scene.splats[id], cam, merged[i], grads.position[id],
                               grads.log_scale[id], grads.rotation[id], grads.opacity_logit[id],
                               grads.sh[id]);
    }
  });
}

}  // namespace fieldsplat
