// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "fieldsplat/error.hpp"
#include "fieldsplat/geometry.hpp"
#include "fieldsplat/parallel.hpp"

namespace fieldsplat {

// Shared by the kd-tree and the brute-force oracle so both produce bitwise
// identical distances.
inline double distance_sq(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

// Neighbor candidates order by (squared distance, index) so ties are stable.
struct Neighbor {
  double dist_sq;
  uint32_t index;
  bool operator<(const Neighbor& o) const {
    if (dist_sq != o.dist_sq) return dist_sq < o.dist_sq;
    return index < o.index;
  }
};

// Median-split kd-tree over 3D points.
class KdTree {
 public:
  explicit KdTree(const std::vector<Vec3>& points) : points_(points) {
    indices_.resize(points.size());
    std::iota(indices_.begin(), indices_.end(), 0u);
    nodes_.reserve(points.size() * 2 + 1);
    if (!points.empty()) root_ = build(0, points.size());
  }

  // k nearest neighbors of `query`, excluding `exclude` (pass a value outside
  // [0, n) to keep all). Result sorted ascending by (distance, index).
  void knn(const Vec3& query, int k, uint32_t exclude, std::vector<Neighbor>& out) const {
    out.clear();
    if (root_ < 0 || k <= 0) return;
    search(root_, query, k, exclude, out);
    std::sort(out.begin(), out.end());
  }

 private:
  struct Node {
    uint32_t begin, end;  // leaf range in indices_
    int axis = -1;
    double split = 0.0;
    int left = -1, right = -1;
  };

  static constexpr uint32_t kLeafSize = 16;

  int build(size_t begin, size_t end) {
    Node node;
    node.begin = static_cast<uint32_t>(begin);
    node.end = static_cast<uint32_t>(end);
    if (end - begin > kLeafSize) {
      Vec3 mn = points_[indices_[begin]], mx = mn;
      for (size_t i = begin + 1; i < end; ++i) {
        mn = mn.cwiseMin(points_[indices_[i]]);
        mx = mx.cwiseMax(points_[indices_[i]]);
      }
      int axis = 0;
      const Vec3 extent = mx - mn;
      if (extent.y() > extent.x()) axis = 1;
      if (extent.z() > extent[axis]) axis = 2;
      const size_t mid = (begin + end) / 2;
      std::nth_element(indices_.begin() + begin, indices_.begin() + mid, indices_.begin() + end,
                       [&](uint32_t a, uint32_t b) {
                         if (points_[a][axis] != points_[b][axis]) {
                           return points_[a][axis] < points_[b][axis];
                         }
                         return a < b;
                       });
      node.axis = axis;
      node.split = points_[indices_[mid]][axis];
      const int self = static_cast<int>(nodes_.size());
      nodes_.push_back(node);
      const int left = build(begin, mid);
      const int right = build(mid, end);
      nodes_[self].left = left;
      nodes_[self].right = right;
      return self;
    }
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size() - 1);
  }

  void search(int node_idx, const Vec3& query, int k, uint32_t exclude,
              std::vector<Neighbor>& heap) const {
    const Node& node = nodes_[node_idx];
    if (node.axis < 0) {
      for (uint32_t i = node.begin; i < node.end; ++i) {
        const uint32_t idx = indices_[i];
        if (idx == exclude) continue;
        const Neighbor cand{distance_sq(points_[idx], query), idx};
        if (heap.size() < static_cast<size_t>(k)) {
          heap.push_back(cand);
          std::push_heap(heap.begin(), heap.end());
        } else if (cand < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = cand;
          std::push_heap(heap.begin(), heap.end());
        }
      }
      return;
    }
    const double delta = query[node.axis] - node.split;
    const int near = delta < 0.0 ? node.left : node.right;
    const int far = delta < 0.0 ? node.right : node.left;
    search(near, query, k, exclude, heap);
    if (heap.size() < static_cast<size_t>(k) || delta * delta <= heap.front().dist_sq) {
      search(far, query, k, exclude, heap);
    }
  }

  const std::vector<Vec3>& points_;
  std::vector<uint32_t> indices_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

// Mean distance of every point to its k nearest neighbors (self excluded).
// Distances are summed in ascending order so the brute-force oracle can
// reproduce the result exactly.
inline std::vector<double> knn_mean_distance(const std::vector<Vec3>& points, int k) {
  if (k < 1) throw Error(errc::kInvalidArgument, "k must be >= 1");
  if (points.size() < static_cast<size_t>(k) + 1) {
    throw Error(errc::kTooFewPoints, "need at least k+1 points");
  }
  const KdTree tree(points);
  std::vector<double> out(points.size(), 0.0);
  parallel_chunks(points.size(), 256, [&](size_t begin, size_t end, size_t) {
    std::vector<Neighbor> neighbors;
    for (size_t i = begin; i < end; ++i) {
      tree.knn(points[i], k, static_cast<uint32_t>(i), neighbors);
      double sum = 0.0;
      for (const Neighbor& n : neighbors) sum += std::sqrt(n.dist_sq);
      out[i] = sum / k;
    }
  });
  return out;
}

}  // namespace fieldsplat
