// SPDX-License-Identifier: Apache-2.0
#include "kflow/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kflow/parallel.hpp"
#include "kflow/simd.hpp"

namespace kflow {

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;

double sinc(double d) {
    if (d == 0.0) return 1.0;  // continuous extension
    double x = kPi * d;
    return std::sin(x) / x;
}
}  // namespace

std::string to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::Rbf: return "rbf";
        case KernelFamily::Sinc: return "sinc";
        case KernelFamily::Softmax: return "softmax";
        case KernelFamily::Sigmoid: return "sigmoid";
        case KernelFamily::Tanh: return "tanh";
        case KernelFamily::Laplacian: return "laplacian";
    }
    return "?";
}

KernelFamily kernel_family_from_string(const std::string& name) {
    if (name == "rbf") return KernelFamily::Rbf;
    if (name == "sinc") return KernelFamily::Sinc;
    if (name == "softmax") return KernelFamily::Softmax;
    if (name == "sigmoid") return KernelFamily::Sigmoid;
    if (name == "tanh") return KernelFamily::Tanh;
    if (name == "laplacian") return KernelFamily::Laplacian;
    throw std::invalid_argument("unknown kernel '" + name + "'");
}

KernelKind KernelKind::rbf(double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("rbf: sigma must be positive");
    return {KernelFamily::Rbf, sigma, true};
}

KernelKind KernelKind::sinc(double sigma, bool squared) {
    if (!(sigma > 0.0)) throw std::invalid_argument("sinc: sigma must be positive");
    return {KernelFamily::Sinc, sigma, squared};
}

KernelKind KernelKind::laplacian(double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("laplacian: sigma must be positive");
    return {KernelFamily::Laplacian, sigma, true};
}

SupportSet grid_supports(const Aabb& box, std::size_t nx, std::size_t ny, std::size_t nz) {
    if (nx < 1 || ny < 1 || nz < 1) {
        throw std::invalid_argument("grid_supports: counts must be >= 1");
    }
    auto coords = [](double lo, double hi, std::size_t n) {
        std::vector<double> c(n);
        if (n == 1) {
            c[0] = 0.5 * (lo + hi);
        } else {
            double step = (hi - lo) / static_cast<double>(n - 1);
            for (std::size_t i = 0; i < n; ++i) c[i] = lo + step * static_cast<double>(i);
        }
        return c;
    };
    auto xs = coords(box.min.x, box.max.x, nx);
    auto ys = coords(box.min.y, box.max.y, ny);
    auto zs = coords(box.min.z, box.max.z, nz);

    SupportSet s;
    s.source = SupportSet::Source::Grid;
    s.points.reserve(nx * ny * nz);
    for (double z : zs) {
        for (double y : ys) {
            for (double x : xs) s.points.emplace_back(x, y, z);
        }
    }
    Vec3 spacing(nx > 1 ? xs[1] - xs[0] : 0.0, ny > 1 ? ys[1] - ys[0] : 0.0,
                 nz > 1 ? zs[1] - zs[0] : 0.0);
    s.grid = SupportSet::GridInfo{{xs[0], ys[0], zs[0]}, spacing, nx, ny, nz};
    return s;
}

SupportSet grid_supports_from_spacing(const Aabb& box, double spacing, std::size_t max_per_axis) {
    if (!(spacing > 0.0)) throw std::invalid_argument("grid_supports_from_spacing: spacing <= 0");
    auto count = [&](double extent) {
        auto n = static_cast<std::size_t>(std::ceil(extent / spacing)) + 1;
        return std::clamp<std::size_t>(n, 1, max_per_axis);
    };
    Vec3 ext = box.extent();
    return grid_supports(box, count(ext.x), count(ext.y), count(ext.z));
}

SupportSet target_supports(const PointCloud& target) {
    SupportSet s;
    s.source = SupportSet::Source::TargetPoints;
    s.points = target.points();
    return s;
}

Matrix kernel_matrix(const EmbeddedCloud& source, const EmbeddedCloud& support,
                     const KernelKind& kind) {
    if (source.dim() != support.dim()) {
        throw std::invalid_argument("kernel_matrix: feature dimension mismatch (" +
                                    std::to_string(source.dim()) + " vs " +
                                    std::to_string(support.dim()) + ")");
    }
    const std::size_t n = source.count();
    const std::size_t m = support.count();
    const std::size_t d = source.dim();
    Matrix k(n, m);

    parallel_chunks(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const double* src = source.rows.row(i);
            double* out = k.row(i);
            switch (kind.family) {
                case KernelFamily::Rbf: {
                    double inv = 1.0 / (2.0 * kind.sigma * kind.sigma);
                    for (std::size_t j = 0; j < m; ++j) {
                        out[j] = std::exp(-simd::squared_distance(src, support.rows.row(j), d) * inv);
                    }
                    break;
                }
                case KernelFamily::Laplacian: {
                    double inv = 1.0 / kind.sigma;
                    for (std::size_t j = 0; j < m; ++j) {
                        double dist = std::sqrt(simd::squared_distance(src, support.rows.row(j), d));
                        out[j] = std::exp(-dist * inv);
                    }
                    break;
                }
                case KernelFamily::Sinc: {
                    for (std::size_t j = 0; j < m; ++j) {
                        double d2 = simd::squared_distance(src, support.rows.row(j), d);
                        double arg = kind.sinc_squared ? kind.sigma * d2
                                                       : kind.sigma * std::sqrt(d2);
                        out[j] = sinc(arg);
                    }
                    break;
                }
                case KernelFamily::Sigmoid: {
                    for (std::size_t j = 0; j < m; ++j) {
                        double ip = kind.sigma * simd::dot(src, support.rows.row(j), d);
                        out[j] = 1.0 / (1.0 + std::exp(-ip));
                    }
                    break;
                }
                case KernelFamily::Tanh: {
                    for (std::size_t j = 0; j < m; ++j) {
                        out[j] = std::tanh(kind.sigma * simd::dot(src, support.rows.row(j), d));
                    }
                    break;
                }
                case KernelFamily::Softmax: {
                    double mx = -std::numeric_limits<double>::infinity();
                    for (std::size_t j = 0; j < m; ++j) {
                        out[j] = kind.sigma * simd::dot(src, support.rows.row(j), d);
                        mx = std::max(mx, out[j]);
                    }
                    double sum = 0.0;
                    for (std::size_t j = 0; j < m; ++j) {
                        out[j] = std::exp(out[j] - mx);
                        sum += out[j];
                    }
                    for (std::size_t j = 0; j < m; ++j) out[j] /= sum;
                    break;
                }
            }
        }
    });
    return k;
}

double CoefficientVector::l1_norm() const {
    double s = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) s += std::abs(alpha.data()[i]);
    return s;
}

FlowField apply_coefficients(const Matrix& kernel, const CoefficientVector& alpha) {
    if (kernel.cols() != alpha.count()) {
        throw std::invalid_argument("apply_coefficients: K has " + std::to_string(kernel.cols()) +
                                    " columns but alpha has " + std::to_string(alpha.count()) +
                                    " rows");
    }
    const std::size_t n = kernel.rows();
    const std::size_t m = kernel.cols();
    // Column-major copy of alpha so each flow component is a contiguous dot.
    std::vector<double> ax(m), ay(m), az(m);
    for (std::size_t j = 0; j < m; ++j) {
        ax[j] = alpha.alpha(j, 0);
        ay[j] = alpha.alpha(j, 1);
        az[j] = alpha.alpha(j, 2);
    }
    std::vector<Vec3> flow(n);
    parallel_chunks(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const double* row = kernel.row(i);
            flow[i] = {simd::dot(row, ax.data(), m), simd::dot(row, ay.data(), m),
                       simd::dot(row, az.data(), m)};
        }
    });
    return FlowField(std::move(flow));
}

}  // namespace kflow
