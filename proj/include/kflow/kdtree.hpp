// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "kflow/core.hpp"

namespace kflow {

/// Exact nearest-neighbor search over a fixed point set. Median-split 3D
/// kd-tree; ties are broken toward the lower point index so that queries are
/// fully deterministic.
class KdTree {
  public:
    explicit KdTree(const PointCloud& cloud);

    struct Hit {
        std::size_t index;
        double squared_distance;
    };

    Hit nearest(const Vec3& query) const;

    /// The k nearest points, ascending (distance, index) order. Throws if
    /// k > size().
    std::vector<Hit> knn(const Vec3& query, std::size_t k) const;

    std::size_t size() const { return points_.size(); }

  private:
    struct Node {
        int axis;        // -1 marks a leaf
        double split;
        std::size_t left, right;    // child node ids
        std::size_t begin, end;     // leaf range into order_
    };

    std::size_t build(std::size_t begin, std::size_t end, int depth);

    std::vector<Vec3> points_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
    std::size_t root_ = 0;
};

}  // namespace kflow
