// SPDX-License-Identifier: Apache-2.0
#include "kflow/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kflow/parallel.hpp"

namespace kflow {

ChamferLoss::ChamferLoss(const PointCloud& target, bool bidirectional)
    : target_(target), index_(target), bidirectional_(bidirectional) {}

LossReport ChamferLoss::evaluate(const PointCloud& deformed) const {
    const std::size_t n = deformed.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    LossReport report;
    report.gradient = Matrix(n, 3, 0.0);

    const std::size_t nchunks = (n + kChunk - 1) / kChunk;
    std::vector<double> partial(nchunks, 0.0);
    parallel_chunks(n, [&](std::size_t b, std::size_t e) {
        double sum = 0.0;
        for (std::size_t i = b; i < e; ++i) {
            auto hit = index_.nearest(deformed[i]);
            sum += hit.squared_distance;
            Vec3 g = (deformed[i] - target_[hit.index]) * (2.0 * inv_n);
            double* row = report.gradient.row(i);
            row[0] = g.x;
            row[1] = g.y;
            row[2] = g.z;
        }
        partial[b / kChunk] = sum;
    });
    double value = 0.0;
    for (double s : partial) value += s;
    report.value = value * inv_n;

    if (bidirectional_) {
        // Reverse term: each target point pulls its nearest deformed point.
        KdTree deformed_index(deformed);
        const std::size_t nt = target_.size();
        const double inv_nt = 1.0 / static_cast<double>(nt);
        double rev = 0.0;
        for (std::size_t j = 0; j < nt; ++j) {
            auto hit = deformed_index.nearest(target_[j]);
            rev += hit.squared_distance;
            Vec3 g = (deformed[hit.index] - target_[j]) * (2.0 * inv_nt);
            double* row = report.gradient.row(hit.index);
            row[0] += g.x;
            row[1] += g.y;
            row[2] += g.z;
        }
        report.value += rev * inv_nt;
    }
    return report;
}

namespace {

// 1D squared distance transform (lower envelope of parabolas).
void dt_1d(const double* f, double* out, std::size_t n, std::vector<int>& v,
           std::vector<double>& z) {
    const double inf = std::numeric_limits<double>::infinity();
    v.resize(n);
    z.resize(n + 1);
    // Infinite samples contribute no parabola; an all-infinite row stays
    // infinite.
    int k = -1;
    for (int q = 0; q < static_cast<int>(n); ++q) {
        if (f[q] == inf) continue;
        double s = -inf;
        while (k >= 0) {
            int p = v[k];
            s = ((f[q] + q * q) - (f[p] + p * p)) / (2.0 * (q - p));
            if (s > z[k]) break;
            --k;
        }
        if (k < 0) s = -inf;
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = inf;
    }
    if (k < 0) {
        for (std::size_t q = 0; q < n; ++q) out[q] = inf;
        return;
    }
    k = 0;
    for (int q = 0; q < static_cast<int>(n); ++q) {
        while (z[k + 1] < q) ++k;
        double d = q - v[k];
        out[q] = d * d + f[v[k]];
    }
}

}  // namespace

std::vector<double> edt_squared(const std::vector<std::uint8_t>& occupied, std::size_t gx,
                                std::size_t gy, std::size_t gz) {
    if (occupied.size() != gx * gy * gz) {
        throw std::invalid_argument("edt_squared: occupancy size mismatch");
    }
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(occupied.size());
    for (std::size_t i = 0; i < occupied.size(); ++i) dist[i] = occupied[i] ? 0.0 : inf;

    auto idx = [&](std::size_t x, std::size_t y, std::size_t z) {
        return (z * gy + y) * gx + x;
    };

    std::vector<double> line, out;
    std::vector<int> v;
    std::vector<double> zbuf;

    // x pass
    line.resize(gx);
    out.resize(gx);
    for (std::size_t z = 0; z < gz; ++z) {
        for (std::size_t y = 0; y < gy; ++y) {
            double* row = dist.data() + idx(0, y, z);
            dt_1d(row, out.data(), gx, v, zbuf);
            std::copy(out.begin(), out.end(), row);
        }
    }
    // y pass
    line.resize(gy);
    out.resize(gy);
    for (std::size_t z = 0; z < gz; ++z) {
        for (std::size_t x = 0; x < gx; ++x) {
            for (std::size_t y = 0; y < gy; ++y) line[y] = dist[idx(x, y, z)];
            dt_1d(line.data(), out.data(), gy, v, zbuf);
            for (std::size_t y = 0; y < gy; ++y) dist[idx(x, y, z)] = out[y];
        }
    }
    // z pass
    line.resize(gz);
    out.resize(gz);
    for (std::size_t y = 0; y < gy; ++y) {
        for (std::size_t x = 0; x < gx; ++x) {
            for (std::size_t z = 0; z < gz; ++z) line[z] = dist[idx(x, y, z)];
            dt_1d(line.data(), out.data(), gz, v, zbuf);
            for (std::size_t z = 0; z < gz; ++z) dist[idx(x, y, z)] = out[z];
        }
    }
    return dist;
}

DistanceTransformGrid::DistanceTransformGrid(Vec3 origin, double spacing, std::size_t gx,
                                             std::size_t gy, std::size_t gz,
                                             std::vector<float> values)
    : origin_(origin), spacing_(spacing), gx_(gx), gy_(gy), gz_(gz), values_(std::move(values)) {
    if (values_.size() != gx_ * gy_ * gz_) {
        throw std::invalid_argument("DistanceTransformGrid: value count mismatch");
    }
}

namespace {
struct AxisSample {
    std::size_t i0, i1;
    double t;
    bool clamped;
};

AxisSample axis_sample(double coord, std::size_t dim) {
    AxisSample s{};
    double hi = static_cast<double>(dim - 1);
    s.clamped = coord <= 0.0 || coord >= hi || dim == 1;
    double c = std::clamp(coord, 0.0, hi);
    s.i0 = static_cast<std::size_t>(c);
    if (s.i0 >= dim - 1) s.i0 = dim - 1;
    s.i1 = std::min(s.i0 + 1, dim - 1);
    s.t = c - static_cast<double>(s.i0);
    return s;
}
}  // namespace

void DistanceTransformGrid::sample_with_gradient(const Vec3& p, double& value, Vec3& grad) const {
    Vec3 g = (p - origin_) * (1.0 / spacing_);
    AxisSample sx = axis_sample(g.x, gx_);
    AxisSample sy = axis_sample(g.y, gy_);
    AxisSample sz = axis_sample(g.z, gz_);

    double c[2][2][2];
    for (int dz = 0; dz < 2; ++dz) {
        for (int dy = 0; dy < 2; ++dy) {
            for (int dx = 0; dx < 2; ++dx) {
                c[dz][dy][dx] = at(dx ? sx.i1 : sx.i0, dy ? sy.i1 : sy.i0, dz ? sz.i1 : sz.i0);
            }
        }
    }
    // Collapse z, then y, keeping the value and the per-axis derivatives.
    double cy[2][2], dz_y[2][2];
    for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
            cy[dy][dx] = c[0][dy][dx] + sz.t * (c[1][dy][dx] - c[0][dy][dx]);
            dz_y[dy][dx] = c[1][dy][dx] - c[0][dy][dx];
        }
    }
    double cx[2], dy_x[2], dz_x[2];
    for (int dx = 0; dx < 2; ++dx) {
        cx[dx] = cy[0][dx] + sy.t * (cy[1][dx] - cy[0][dx]);
        dy_x[dx] = cy[1][dx] - cy[0][dx];
        dz_x[dx] = dz_y[0][dx] + sy.t * (dz_y[1][dx] - dz_y[0][dx]);
    }
    value = cx[0] + sx.t * (cx[1] - cx[0]);
    double dvx = cx[1] - cx[0];
    double dvy = dy_x[0] + sx.t * (dy_x[1] - dy_x[0]);
    double dvz = dz_x[0] + sx.t * (dz_x[1] - dz_x[0]);

    double inv = 1.0 / spacing_;
    grad = {sx.clamped ? 0.0 : dvx * inv, sy.clamped ? 0.0 : dvy * inv,
            sz.clamped ? 0.0 : dvz * inv};
}

double DistanceTransformGrid::sample(const Vec3& p) const {
    double value;
    Vec3 grad;
    sample_with_gradient(p, value, grad);
    return value;
}

DistanceTransformGrid build_dt(const PointCloud& target, const Aabb& box, double spacing,
                               std::size_t voxel_budget) {
    if (!(spacing > 0.0)) throw std::invalid_argument("build_dt: spacing must be positive");
    Vec3 ext = box.extent();
    auto dim = [&](double e) {
        return static_cast<std::size_t>(std::ceil(e / spacing)) + 1;
    };
    std::size_t gx = dim(ext.x), gy = dim(ext.y), gz = dim(ext.z);
    if (gx * gy * gz > voxel_budget) {
        double scale = std::cbrt(static_cast<double>(gx * gy * gz) /
                                 static_cast<double>(voxel_budget));
        throw std::invalid_argument(
            "build_dt: grid " + std::to_string(gx) + "x" + std::to_string(gy) + "x" +
            std::to_string(gz) + " exceeds the voxel budget; try spacing >= " +
            std::to_string(spacing * scale));
    }

    std::vector<std::uint8_t> occupied(gx * gy * gz, 0);
    for (const Vec3& p : target.points()) {
        Vec3 g = (p - box.min) * (1.0 / spacing);
        if (g.x < -0.5 || g.y < -0.5 || g.z < -0.5 || g.x > gx - 0.5 || g.y > gy - 0.5 ||
            g.z > gz - 0.5) {
            throw std::invalid_argument("build_dt: target point outside the grid box");
        }
        auto ix = std::min<std::size_t>(static_cast<std::size_t>(std::lround(std::max(g.x, 0.0))), gx - 1);
        auto iy = std::min<std::size_t>(static_cast<std::size_t>(std::lround(std::max(g.y, 0.0))), gy - 1);
        auto iz = std::min<std::size_t>(static_cast<std::size_t>(std::lround(std::max(g.z, 0.0))), gz - 1);
        occupied[(iz * gy + iy) * gx + ix] = 1;
    }

    std::vector<double> sq = edt_squared(occupied, gx, gy, gz);
    std::vector<float> values(sq.size());
    for (std::size_t i = 0; i < sq.size(); ++i) {
        values[i] = static_cast<float>(spacing * std::sqrt(sq[i]));
    }
    return DistanceTransformGrid(box.min, spacing, gx, gy, gz, std::move(values));
}

DtLoss::DtLoss(std::shared_ptr<const DistanceTransformGrid> grid) : grid_(std::move(grid)) {
    if (!grid_) throw std::invalid_argument("DtLoss: null grid");
}

DtLoss::DtLoss(const PointCloud& target, const Aabb& box, double spacing)
    : grid_(std::make_shared<DistanceTransformGrid>(build_dt(target, box, spacing))) {}

LossReport DtLoss::evaluate(const PointCloud& deformed) const {
    const std::size_t n = deformed.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    LossReport report;
    report.gradient = Matrix(n, 3, 0.0);

    const std::size_t nchunks = (n + kChunk - 1) / kChunk;
    std::vector<double> partial(nchunks, 0.0);
    parallel_chunks(n, [&](std::size_t b, std::size_t e) {
        double sum = 0.0;
        for (std::size_t i = b; i < e; ++i) {
            double value;
            Vec3 grad;
            grid_->sample_with_gradient(deformed[i], value, grad);
            sum += value;
            double* row = report.gradient.row(i);
            row[0] = grad.x * inv_n;
            row[1] = grad.y * inv_n;
            row[2] = grad.z * inv_n;
        }
        partial[b / kChunk] = sum;
    });
    double value = 0.0;
    for (double s : partial) value += s;
    report.value = value * inv_n;
    return report;
}

}  // namespace kflow
