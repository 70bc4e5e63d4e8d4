// SPDX-License-Identifier: Apache-2.0
#include "kflow/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace kflow {

namespace {
constexpr std::size_t kLeafSize = 16;

inline double axis_coord(const Vec3& p, int axis) { return axis == 0 ? p.x : (axis == 1 ? p.y : p.z); }

// (squared distance, index) with lower index winning ties.
struct Best {
    double d2 = std::numeric_limits<double>::infinity();
    std::size_t idx = 0;

    bool accept(double d2c, std::size_t i) {
        if (d2c < d2 || (d2c == d2 && i < idx)) {
            d2 = d2c;
            idx = i;
            return true;
        }
        return false;
    }
};
}  // namespace

KdTree::KdTree(const PointCloud& cloud) : points_(cloud.points()) {
    order_.resize(points_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    root_ = build(0, points_.size(), 0);
}

std::size_t KdTree::build(std::size_t begin, std::size_t end, int depth) {
    std::size_t id = nodes_.size();
    nodes_.push_back({});
    if (end - begin <= kLeafSize) {
        nodes_[id] = {-1, 0.0, 0, 0, begin, end};
        return id;
    }
    // Split along the widest axis of the subset.
    Vec3 lo = points_[order_[begin]], hi = lo;
    for (std::size_t i = begin; i < end; ++i) {
        const Vec3& p = points_[order_[i]];
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        lo.z = std::min(lo.z, p.z);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
        hi.z = std::max(hi.z, p.z);
    }
    Vec3 ext = hi - lo;
    int axis = 0;
    if (ext.y > ext.x) axis = 1;
    if (ext.z > axis_coord(ext, axis)) axis = 2;

    std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::size_t a, std::size_t b) {
                         return axis_coord(points_[a], axis) < axis_coord(points_[b], axis);
                     });
    double split = axis_coord(points_[order_[mid]], axis);

    std::size_t left = build(begin, mid, depth + 1);
    std::size_t right = build(mid, end, depth + 1);
    nodes_[id] = {axis, split, left, right, 0, 0};
    return id;
}

KdTree::Hit KdTree::nearest(const Vec3& query) const {
    Best best;
    // Explicit stack; nearer child first.
    std::vector<std::size_t> stack{root_};
    std::vector<double> bound{0.0};
    while (!stack.empty()) {
        std::size_t id = stack.back();
        double b = bound.back();
        stack.pop_back();
        bound.pop_back();
        if (b > best.d2) continue;
        const Node& node = nodes_[id];
        if (node.axis < 0) {
            for (std::size_t i = node.begin; i < node.end; ++i) {
                std::size_t idx = order_[i];
                best.accept(squared_distance(query, points_[idx]), idx);
            }
            continue;
        }
        double diff = axis_coord(query, node.axis) - node.split;
        std::size_t near = diff < 0.0 ? node.left : node.right;
        std::size_t far = diff < 0.0 ? node.right : node.left;
        stack.push_back(far);
        bound.push_back(diff * diff);
        stack.push_back(near);
        bound.push_back(0.0);
    }
    return {best.idx, best.d2};
}

std::vector<KdTree::Hit> KdTree::knn(const Vec3& query, std::size_t k) const {
    if (k == 0 || k > points_.size()) {
        throw std::invalid_argument("KdTree::knn: k must be in [1, size()]");
    }
    using Entry = std::pair<double, std::size_t>;  // max-heap on (d2, index)
    std::priority_queue<Entry> heap;
    auto worst = [&] { return heap.size() < k ? std::numeric_limits<double>::infinity()
                                              : heap.top().first; };
    auto offer = [&](double d2, std::size_t idx) {
        Entry e{d2, idx};
        if (heap.size() < k) {
            heap.push(e);
        } else if (e < heap.top()) {
            heap.pop();
            heap.push(e);
        }
    };

    std::vector<std::size_t> stack{root_};
    std::vector<double> bound{0.0};
    while (!stack.empty()) {
        std::size_t id = stack.back();
        double b = bound.back();
        stack.pop_back();
        bound.pop_back();
        if (b > worst()) continue;
        const Node& node = nodes_[id];
        if (node.axis < 0) {
            for (std::size_t i = node.begin; i < node.end; ++i) {
                std::size_t idx = order_[i];
                offer(squared_distance(query, points_[idx]), idx);
            }
            continue;
        }
        double diff = axis_coord(query, node.axis) - node.split;
        std::size_t near = diff < 0.0 ? node.left : node.right;
        std::size_t far = diff < 0.0 ? node.right : node.left;
        stack.push_back(far);
        bound.push_back(diff * diff);
        stack.push_back(near);
        bound.push_back(0.0);
    }

    std::vector<Hit> out(heap.size());
    for (std::size_t i = out.size(); i-- > 0;) {
        out[i] = {heap.top().second, heap.top().first};
        heap.pop();
    }
    return out;
}

}  // namespace kflow
