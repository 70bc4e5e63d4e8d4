// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace kflow {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    Vec3 operator-() const { return {-x, -y, -z}; }
    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double squared_norm() const { return dot(*this); }
    double norm() const { return std::sqrt(squared_norm()); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }

    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline double squared_distance(const Vec3& a, const Vec3& b) { return (a - b).squared_norm(); }

/// Ordered list of 3D points in meters. Rejects empty or non-finite input at
/// construction; index order is stable through every downstream stage.
class PointCloud {
  public:
    explicit PointCloud(std::vector<Vec3> points);

    std::size_t size() const { return points_.size(); }
    const Vec3& operator[](std::size_t i) const { return points_[i]; }
    const std::vector<Vec3>& points() const { return points_; }

  private:
    std::vector<Vec3> points_;
};

/// Per-point 3D displacements, index-aligned with a source PointCloud.
class FlowField {
  public:
    explicit FlowField(std::vector<Vec3> vectors);
    static FlowField zeros(std::size_t n) { return FlowField(std::vector<Vec3>(n)); }

    std::size_t size() const { return vectors_.size(); }
    const Vec3& operator[](std::size_t i) const { return vectors_[i]; }
    const std::vector<Vec3>& vectors() const { return vectors_; }

    FlowField negated() const;

  private:
    std::vector<Vec3> vectors_;
};

struct Aabb {
    Vec3 min;
    Vec3 max;

    Aabb(const Vec3& mn, const Vec3& mx);
    Vec3 extent() const { return max - min; }
};

/// output[i] = source[i] + flow[i]. Throws on length mismatch.
PointCloud apply_flow(const PointCloud& source, const FlowField& flow);

/// Componentwise min/max over all points of all clouds, expanded by `padding`
/// on each side. Throws if no cloud is given or padding < 0.
Aabb bounding_box(const std::vector<const PointCloud*>& clouds, double padding = 0.0);
Aabb bounding_box(const PointCloud& cloud, double padding = 0.0);
Aabb bounding_box(const PointCloud& a, const PointCloud& b, double padding = 0.0);

/// Dense row-major matrix of doubles. The workhorse container for embeddings,
/// kernel matrices, and coefficient blocks.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::size_t size() const { return data_.size(); }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace kflow
