// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>

#include "kflow/core.hpp"
#include "kflow/embed.hpp"

namespace kflow {

enum class KernelFamily { Rbf, Sinc, Softmax, Sigmoid, Tanh, Laplacian };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

/// Kernel kind plus its scale, where the family takes one.
struct KernelKind {
    KernelFamily family = KernelFamily::Rbf;
    // RBF/Laplacian width, Sinc distance scale; for Softmax/Sigmoid/Tanh a
    // gain on the inner product (1.0 leaves the textbook form unchanged).
    double sigma = 1.0;
    bool sinc_squared = true;    // Sinc argument: sigma * ||d||^2 (default) or sigma * ||d||

    static KernelKind rbf(double sigma);
    static KernelKind sinc(double sigma, bool squared = true);
    static KernelKind softmax(double sigma = 1.0) { return {KernelFamily::Softmax, sigma, true}; }
    static KernelKind sigmoid(double sigma = 1.0) { return {KernelFamily::Sigmoid, sigma, true}; }
    static KernelKind tanh(double sigma = 1.0) { return {KernelFamily::Tanh, sigma, true}; }
    static KernelKind laplacian(double sigma);
};

/// The M supporting points anchoring the kernel expansion.
struct SupportSet {
    enum class Source { Grid, TargetPoints };

    std::vector<Vec3> points;
    Source source = Source::Grid;

    // Grid metadata, present for the Grid source.
    struct GridInfo {
        Vec3 origin;
        Vec3 spacing;
        std::size_t nx, ny, nz;
    };
    std::optional<GridInfo> grid;

    std::size_t count() const { return points.size(); }
    PointCloud as_cloud() const { return PointCloud(points); }
};

/// Regular lattice spanning `box` inclusively; a count of 1 on an axis places
/// the point at the axis midpoint. M = nx*ny*nz, x-fastest order.
SupportSet grid_supports(const Aabb& box, std::size_t nx, std::size_t ny, std::size_t nz);

/// Counts derived from a target spacing, clamped to `max_per_axis` points.
SupportSet grid_supports_from_spacing(const Aabb& box, double spacing,
                                      std::size_t max_per_axis = 32);

SupportSet target_supports(const PointCloud& target);

/// N x M similarity matrix between embedded source rows and embedded support
/// rows. RBF/Sinc/Laplacian act on the feature distance; Softmax/Sigmoid/Tanh
/// on the feature inner product, with Softmax normalized per source row.
Matrix kernel_matrix(const EmbeddedCloud& source, const EmbeddedCloud& support,
                     const KernelKind& kind);

/// M x 3 linear coefficients, one 3-vector per supporting point.
struct CoefficientVector {
    Matrix alpha;  // M x 3

    static CoefficientVector zeros(std::size_t m) { return {Matrix(m, 3, 0.0)}; }
    std::size_t count() const { return alpha.rows(); }
    double l1_norm() const;
};

/// flow[i] = sum_m K(i,m) * alpha[m], i.e. the matrix product K * alpha.
FlowField apply_coefficients(const Matrix& kernel, const CoefficientVector& alpha);

}  // namespace kflow
