// SPDX-License-Identifier: Apache-2.0
#include "kflow/synth.hpp"

#include <cmath>

#include "kflow/rng.hpp"

namespace kflow {

Vec3 RigidMotion::apply(const Vec3& p) const {
    // Rodrigues rotation about a unit axis through `center`.
    Vec3 r = p - center;
    double n = axis.norm();
    Vec3 rotated = r;
    if (angle_rad != 0.0 && n > 0.0) {
        Vec3 k = axis * (1.0 / n);
        double c = std::cos(angle_rad);
        double s = std::sin(angle_rad);
        Vec3 kxr{k.y * r.z - k.z * r.y, k.z * r.x - k.x * r.z, k.x * r.y - k.y * r.x};
        double kdr = k.dot(r);
        rotated = r * c + kxr * s + k * (kdr * (1.0 - c));
    }
    return rotated + center + translation;
}

SceneSpec SceneSpec::default_scene(std::uint64_t seed) {
    SceneSpec spec;
    spec.seed = seed;
    spec.background_count = 10000;
    spec.background_half_extent = {20.0, 20.0, 2.0};
    ObjectSpec a;
    a.point_count = 1000;
    a.center = {5.0, 3.0, 0.5};
    a.half_extent = {1.5, 1.0, 0.8};
    a.motion.translation = {0.8, 0.2, 0.0};
    ObjectSpec b;
    b.point_count = 1000;
    b.center = {-6.0, -4.0, 0.5};
    b.half_extent = {1.5, 1.0, 0.8};
    b.motion.translation = {-0.4, 0.6, 0.0};
    spec.objects = {a, b};
    return spec;
}

ScenePair generate(const SceneSpec& spec) {
    Rng rng(spec.seed);
    std::vector<Vec3> source;
    std::vector<int> owner;
    source.reserve(spec.background_count + spec.objects.size() * 1000);

    auto sample_box = [&](const Vec3& center, const Vec3& half) {
        return Vec3{rng.uniform(center.x - half.x, center.x + half.x),
                    rng.uniform(center.y - half.y, center.y + half.y),
                    rng.uniform(center.z - half.z, center.z + half.z)};
    };

    for (std::size_t i = 0; i < spec.background_count; ++i) {
        source.push_back(sample_box({0.0, 0.0, 0.0}, spec.background_half_extent));
        owner.push_back(-1);
    }
    for (std::size_t o = 0; o < spec.objects.size(); ++o) {
        const ObjectSpec& obj = spec.objects[o];
        for (std::size_t i = 0; i < obj.point_count; ++i) {
            source.push_back(sample_box(obj.center, obj.half_extent));
            owner.push_back(static_cast<int>(o));
        }
    }
    if (source.empty()) throw std::invalid_argument("generate: scene spec produces no points");

    std::vector<Vec3> target(source.size());
    std::vector<Vec3> flow(source.size());
    for (std::size_t i = 0; i < source.size(); ++i) {
        Vec3 moved = owner[i] < 0 ? source[i] : spec.objects[owner[i]].motion.apply(source[i]);
        flow[i] = moved - source[i];
        target[i] = moved;
    }
    // Noise perturbs the target only; gt_flow stays exact.
    if (spec.noise_sigma > 0.0) {
        for (Vec3& t : target) {
            t.x += rng.gaussian(0.0, spec.noise_sigma);
            t.y += rng.gaussian(0.0, spec.noise_sigma);
            t.z += rng.gaussian(0.0, spec.noise_sigma);
        }
    }

    return {PointCloud(std::move(source)), PointCloud(std::move(target)),
            FlowField(std::move(flow)), std::move(owner)};
}

}  // namespace kflow
