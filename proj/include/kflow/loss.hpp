// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "kflow/core.hpp"
#include "kflow/kdtree.hpp"

namespace kflow {

/// Loss value plus its gradient with respect to the deformed source points.
struct LossReport {
    double value = 0.0;
    Matrix gradient;  // N x 3, d(loss)/d(p')
};

/// Correspondence-based Chamfer loss. Forward term: mean over deformed points
/// of squared distance to the nearest target. The bidirectional flag adds the
/// mean over target points of squared distance to the nearest deformed point.
class ChamferLoss {
  public:
    explicit ChamferLoss(const PointCloud& target, bool bidirectional = false);

    LossReport evaluate(const PointCloud& deformed) const;

    const PointCloud& target() const { return target_; }
    bool bidirectional() const { return bidirectional_; }

  private:
    PointCloud target_;
    KdTree index_;
    bool bidirectional_;
};

/// Exact squared Euclidean distance transform of a binary voxel grid.
/// `occupied` is x-fastest; the result holds, per voxel, the squared distance
/// in integer voxel units to the nearest occupied voxel. Separable
/// lower-envelope algorithm, one pass per axis.
std::vector<double> edt_squared(const std::vector<std::uint8_t>& occupied, std::size_t gx,
                                std::size_t gy, std::size_t gz);

/// Axis-aligned voxel grid of Euclidean distances (meters) to the nearest
/// occupied target voxel center.
class DistanceTransformGrid {
  public:
    DistanceTransformGrid(Vec3 origin, double spacing, std::size_t gx, std::size_t gy,
                          std::size_t gz, std::vector<float> values);

    const Vec3& origin() const { return origin_; }
    double spacing() const { return spacing_; }
    std::size_t gx() const { return gx_; }
    std::size_t gy() const { return gy_; }
    std::size_t gz() const { return gz_; }
    const std::vector<float>& values() const { return values_; }

    float at(std::size_t ix, std::size_t iy, std::size_t iz) const {
        return values_[(iz * gy_ + iy) * gx_ + ix];
    }

    /// Trilinearly interpolated distance at a world-space point, with queries
    /// outside the grid clamped to the boundary.
    double sample(const Vec3& p) const;

    /// Interpolated value and its analytic spatial gradient; the gradient is
    /// zero along any clamped axis.
    void sample_with_gradient(const Vec3& p, double& value, Vec3& grad) const;

  private:
    Vec3 origin_;
    double spacing_;
    std::size_t gx_, gy_, gz_;
    std::vector<float> values_;
};

/// Builds the distance-transform grid for `target` over `box`. Throws if the
/// voxel count would exceed `voxel_budget` (suggesting a coarser spacing).
DistanceTransformGrid build_dt(const PointCloud& target, const Aabb& box, double spacing,
                               std::size_t voxel_budget = 512ull * 512ull * 512ull);

/// Correspondence-free loss: mean interpolated grid distance over the
/// deformed points.
class DtLoss {
  public:
    explicit DtLoss(std::shared_ptr<const DistanceTransformGrid> grid);
    DtLoss(const PointCloud& target, const Aabb& box, double spacing);

    LossReport evaluate(const PointCloud& deformed) const;

    const DistanceTransformGrid& grid() const { return *grid_; }

  private:
    std::shared_ptr<const DistanceTransformGrid> grid_;
};

}  // namespace kflow
