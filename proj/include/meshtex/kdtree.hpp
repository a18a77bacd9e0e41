// Copyright (c) 2026 The meshtex Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "meshtex/error.hpp"
#include "meshtex/math.hpp"

namespace meshtex {

/// Exact nearest-neighbor KD-tree over 3D points. Splits cycle x/y/z with
/// a (coordinate, index)-sorted median, so construction is deterministic;
/// queries prune only strictly-farther subtrees and break distance ties by
/// lowest point index, making results identical to a brute-force scan.
class KdTree {
 public:
  explicit KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
    check(!points_.empty(), errc::invalid_argument, "kd-tree needs at least one point");
    order_.resize(points_.size());
    for (auto i = 0; i < int(points_.size()); i++) order_[i] = i;
    nodes_.reserve(points_.size());
    root_ = build(0, int(points_.size()), 0);
  }

  struct Result {
    int index = -1;
    double distance = 0;
  };

  Result nearest(const Vec3& query) const {
    auto best_index = -1;
    auto best_d2 = std::numeric_limits<double>::infinity();
    descend(root_, query, best_index, best_d2);
    return {best_index, std::sqrt(best_d2)};
  }

  const std::vector<Vec3>& points() const { return points_; }

 private:
  struct Node {
    int point = -1;
    int left = -1;
    int right = -1;
    int axis = 0;
  };

  int build(int begin, int end, int depth) {
    if (begin >= end) return -1;
    auto axis = depth % 3;
    std::sort(order_.begin() + begin, order_.begin() + end, [&](int a, int b) {
      auto ca = points_[a][axis], cb = points_[b][axis];
      return ca != cb ? ca < cb : a < b;
    });
    auto mid = begin + (end - begin) / 2;
    auto node = Node{};
    node.point = order_[mid];
    node.axis = axis;
    auto index = int(nodes_.size());
    nodes_.push_back(node);
    nodes_[index].left = build(begin, mid, depth + 1);
    nodes_[index].right = build(mid + 1, end, depth + 1);
    return index;
  }

  void consider(int point, const Vec3& query, int& best_index, double& best_d2) const {
    auto d2 = distance_squared(points_[point], query);
    if (d2 < best_d2 || (d2 == best_d2 && point < best_index)) {
      best_d2 = d2;
      best_index = point;
    }
  }

  void descend(int node_index, const Vec3& query, int& best_index, double& best_d2) const {
    if (node_index < 0) return;
    auto& node = nodes_[node_index];
    consider(node.point, query, best_index, best_d2);
    auto delta = query[node.axis] - points_[node.point][node.axis];
    auto near = delta < 0 ? node.left : node.right;
    auto far = delta < 0 ? node.right : node.left;
    descend(near, query, best_index, best_d2);
    // equal plane distance can still hide a tied, lower-index point
    if (delta * delta <= best_d2) descend(far, query, best_index, best_d2);
  }

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace meshtex
