// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "kflow/core.hpp"

namespace kflow {

/// Rigid motion: rotate by `angle_rad` about `axis` through `center`, then
/// translate.
struct RigidMotion {
    Vec3 axis{0.0, 0.0, 1.0};
    double angle_rad = 0.0;
    Vec3 center;
    Vec3 translation;

    Vec3 apply(const Vec3& p) const;
};

struct ObjectSpec {
    std::size_t point_count = 1000;
    Vec3 center;
    Vec3 half_extent{1.0, 1.0, 1.0};
    RigidMotion motion;
};

/// Synthetic scene pair with exact ground-truth flow. Deterministic given
/// the seed; noise goes on the target only.
struct SceneSpec {
    std::size_t background_count = 10000;
    Vec3 background_half_extent{20.0, 20.0, 2.0};
    std::vector<ObjectSpec> objects;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    /// Desk-scale default: static background plus two translated boxes.
    static SceneSpec default_scene(std::uint64_t seed = 0);
};

struct ScenePair {
    PointCloud source;
    PointCloud target;
    FlowField gt_flow;
    std::vector<int> object_id;  // -1 background, else index into spec.objects
};

ScenePair generate(const SceneSpec& spec);

}  // namespace kflow
