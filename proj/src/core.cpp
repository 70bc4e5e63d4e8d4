// SPDX-License-Identifier: Apache-2.0
#include "kflow/core.hpp"

#include <algorithm>
#include <limits>

namespace kflow {

PointCloud::PointCloud(std::vector<Vec3> points) : points_(std::move(points)) {
    if (points_.empty()) {
        throw std::invalid_argument("PointCloud: empty cloud rejected");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!points_[i].finite()) {
            throw std::invalid_argument("PointCloud: non-finite coordinate at index " +
                                        std::to_string(i));
        }
    }
}

FlowField::FlowField(std::vector<Vec3> vectors) : vectors_(std::move(vectors)) {
    for (std::size_t i = 0; i < vectors_.size(); ++i) {
        if (!vectors_[i].finite()) {
            throw std::invalid_argument("FlowField: non-finite component at index " +
                                        std::to_string(i));
        }
    }
}

FlowField FlowField::negated() const {
    std::vector<Vec3> out(vectors_.size());
    for (std::size_t i = 0; i < vectors_.size(); ++i) out[i] = -vectors_[i];
    return FlowField(std::move(out));
}

Aabb::Aabb(const Vec3& mn, const Vec3& mx) : min(mn), max(mx) {
    if (!(min.x <= max.x && min.y <= max.y && min.z <= max.z)) {
        throw std::invalid_argument("Aabb: min must be <= max componentwise");
    }
}

PointCloud apply_flow(const PointCloud& source, const FlowField& flow) {
    if (source.size() != flow.size()) {
        throw std::invalid_argument("apply_flow: cloud has " + std::to_string(source.size()) +
                                    " points but flow has " + std::to_string(flow.size()));
    }
    std::vector<Vec3> out(source.size());
    for (std::size_t i = 0; i < source.size(); ++i) out[i] = source[i] + flow[i];
    return PointCloud(std::move(out));
}

Aabb bounding_box(const std::vector<const PointCloud*>& clouds, double padding) {
    if (clouds.empty()) throw std::invalid_argument("bounding_box: no input clouds");
    if (padding < 0.0) throw std::invalid_argument("bounding_box: negative padding");
    const double inf = std::numeric_limits<double>::infinity();
    Vec3 mn(inf, inf, inf), mx(-inf, -inf, -inf);
    for (const PointCloud* c : clouds) {
        for (const Vec3& p : c->points()) {
            mn.x = std::min(mn.x, p.x);
            mn.y = std::min(mn.y, p.y);
            mn.z = std::min(mn.z, p.z);
            mx.x = std::max(mx.x, p.x);
            mx.y = std::max(mx.y, p.y);
            mx.z = std::max(mx.z, p.z);
        }
    }
    Vec3 pad(padding, padding, padding);
    return Aabb(mn - pad, mx + pad);
}

Aabb bounding_box(const PointCloud& cloud, double padding) {
    return bounding_box(std::vector<const PointCloud*>{&cloud}, padding);
}

Aabb bounding_box(const PointCloud& a, const PointCloud& b, double padding) {
    return bounding_box(std::vector<const PointCloud*>{&a, &b}, padding);
}

}  // namespace kflow
