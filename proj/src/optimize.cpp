// SPDX-License-Identifier: Apache-2.0
#include "kflow/optimize.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "kflow/parallel.hpp"
#include "kflow/simd.hpp"

namespace kflow {

DataTerm make_chamfer_term(const ChamferLoss& loss) {
    return [&loss](const PointCloud& deformed) { return loss.evaluate(deformed); };
}

DataTerm make_dt_term(const DtLoss& loss) {
    return [&loss](const PointCloud& deformed) { return loss.evaluate(deformed); };
}

DataTerm make_least_squares_term(const PointCloud& source, const FlowField& flow_gt) {
    if (source.size() != flow_gt.size()) {
        throw std::invalid_argument("make_least_squares_term: length mismatch");
    }
    PointCloud target = apply_flow(source, flow_gt);
    return [target](const PointCloud& deformed) {
        if (deformed.size() != target.size()) {
            throw std::invalid_argument("least_squares_term: length mismatch");
        }
        const std::size_t n = deformed.size();
        const double inv_n = 1.0 / static_cast<double>(n);
        LossReport r;
        r.gradient = Matrix(n, 3, 0.0);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            Vec3 d = deformed[i] - target[i];
            sum += d.squared_norm();
            double* row = r.gradient.row(i);
            row[0] = 2.0 * d.x * inv_n;
            row[1] = 2.0 * d.y * inv_n;
            row[2] = 2.0 * d.z * inv_n;
        }
        r.value = sum * inv_n;
        return r;
    };
}

void OptimConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("OptimConfig: learning_rate <= 0");
    if (lambda_l1 < 0.0) throw std::invalid_argument("OptimConfig: lambda_l1 < 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw std::invalid_argument("OptimConfig: betas must be in [0, 1)");
    }
    if (!(epsilon > 0.0)) throw std::invalid_argument("OptimConfig: epsilon <= 0");
}

namespace {
inline double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// grad_alpha = K^T * grad_points (M x 3), accumulated row-by-row so the K
// rows stream contiguously.
Matrix kernel_transpose_apply(const Matrix& kernel, const Matrix& grad_points) {
    const std::size_t n = kernel.rows();
    const std::size_t m = kernel.cols();
    std::vector<double> gx(m, 0.0), gy(m, 0.0), gz(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = kernel.row(i);
        const double* g = grad_points.row(i);
        simd::axpy(gx.data(), g[0], row, m);
        simd::axpy(gy.data(), g[1], row, m);
        simd::axpy(gz.data(), g[2], row, m);
    }
    Matrix out(m, 3);
    for (std::size_t j = 0; j < m; ++j) {
        out(j, 0) = gx[j];
        out(j, 1) = gy[j];
        out(j, 2) = gz[j];
    }
    return out;
}
}  // namespace

Objective objective(const Matrix& kernel, const PointCloud& source, const CoefficientVector& alpha,
                    const DataTerm& data_term, double lambda_l1) {
    if (kernel.rows() != source.size()) {
        throw std::invalid_argument("objective: kernel rows != source size");
    }
    FlowField flow = apply_coefficients(kernel, alpha);
    PointCloud deformed = apply_flow(source, flow);
    LossReport data = data_term(deformed);

    Objective obj;
    obj.gradient = kernel_transpose_apply(kernel, data.gradient);
    double l1 = 0.0;
    for (std::size_t i = 0; i < alpha.alpha.size(); ++i) {
        double a = alpha.alpha.data()[i];
        l1 += std::abs(a);
        obj.gradient.data()[i] += lambda_l1 * sign(a);
    }
    obj.value = data.value + lambda_l1 * l1;
    return obj;
}

std::pair<CoefficientVector, OptimTrace> optimize_alpha(const Matrix& kernel,
                                                        const PointCloud& source,
                                                        const DataTerm& data_term,
                                                        const OptimConfig& config) {
    config.validate();
    const std::size_t m = kernel.cols();
    CoefficientVector alpha = CoefficientVector::zeros(m);
    CoefficientVector best = alpha;
    double best_loss = std::numeric_limits<double>::infinity();

    Matrix m1(m, 3, 0.0), m2(m, 3, 0.0);  // Adam moment accumulators
    OptimTrace trace;
    trace.stop_reason = "max-iters";
    std::size_t stale = 0;

    auto start = std::chrono::steady_clock::now();
    for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
        Objective obj = objective(kernel, source, alpha, data_term, config.lambda_l1);
        if (!std::isfinite(obj.value)) {
            throw std::runtime_error("optimize_alpha: non-finite loss at iteration " +
                                     std::to_string(iter));
        }
        double l1 = alpha.l1_norm();
        double wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - start)
                             .count();
        trace.records.push_back(
            {iter, obj.value - config.lambda_l1 * l1, config.lambda_l1 * l1, obj.value, wall_ms});

        // Track the best alpha and the early-stop window.
        if (obj.value < best_loss * (1.0 - config.early_stop_min_delta) ||
            !std::isfinite(best_loss)) {
            stale = 0;
        } else {
            ++stale;
        }
        if (obj.value < best_loss) {
            best_loss = obj.value;
            best = alpha;
        }
        if (stale >= config.early_stop_patience && config.early_stop_patience > 0) {
            trace.stop_reason = "early-stop";
            break;
        }

        double t = static_cast<double>(iter + 1);
        double bc1 = 1.0 - std::pow(config.beta1, t);
        double bc2 = 1.0 - std::pow(config.beta2, t);
        for (std::size_t i = 0; i < alpha.alpha.size(); ++i) {
            double g = obj.gradient.data()[i];
            double& mo = m1.data()[i];
            double& vo = m2.data()[i];
            mo = config.beta1 * mo + (1.0 - config.beta1) * g;
            vo = config.beta2 * vo + (1.0 - config.beta2) * g * g;
            double mhat = mo / bc1;
            double vhat = vo / bc2;
            alpha.alpha.data()[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
        }
    }
    return {std::move(best), std::move(trace)};
}

namespace {
// Cholesky factorization/solve of a symmetric positive-definite system in
// place; throws when a pivot is not positive.
void cholesky_solve(Matrix& a, std::vector<std::vector<double>>& rhs) {
    const std::size_t n = a.rows();
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j) - simd::dot(a.row(j), a.row(j), j);
        if (!(d > 0.0)) {
            throw std::runtime_error(
                "closed_form_alpha: singular normal equations; use delta > 0");
        }
        d = std::sqrt(d);
        a(j, j) = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            a(i, j) = (a(i, j) - simd::dot(a.row(i), a.row(j), j)) / d;
        }
    }
    for (auto& b : rhs) {
        // forward then backward substitution
        for (std::size_t i = 0; i < n; ++i) {
            b[i] = (b[i] - simd::dot(a.row(i), b.data(), i)) / a(i, i);
        }
        for (std::size_t i = n; i-- > 0;) {
            double s = b[i];
            for (std::size_t k = i + 1; k < n; ++k) s -= a(k, i) * b[k];
            b[i] = s / a(i, i);
        }
    }
}
}  // namespace

CoefficientVector closed_form_alpha(const Matrix& kernel, const FlowField& flow_gt, double delta) {
    if (kernel.rows() != flow_gt.size()) {
        throw std::invalid_argument("closed_form_alpha: kernel rows != flow length");
    }
    if (delta < 0.0) throw std::invalid_argument("closed_form_alpha: delta < 0");
    const std::size_t n = kernel.rows();
    const std::size_t m = kernel.cols();

    // Normal equations: (K^T K + delta I) alpha = K^T f, one solve per column.
    Matrix gram(m, m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = kernel.row(i);
        for (std::size_t j = 0; j < m; ++j) {
            if (row[j] != 0.0) simd::axpy(gram.row(j), row[j], row, m);
        }
    }
    for (std::size_t j = 0; j < m; ++j) gram(j, j) += delta;

    std::vector<std::vector<double>> rhs(3, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = kernel.row(i);
        const Vec3& f = flow_gt[i];
        simd::axpy(rhs[0].data(), f.x, row, m);
        simd::axpy(rhs[1].data(), f.y, row, m);
        simd::axpy(rhs[2].data(), f.z, row, m);
    }

    cholesky_solve(gram, rhs);

    CoefficientVector alpha = CoefficientVector::zeros(m);
    for (std::size_t j = 0; j < m; ++j) {
        alpha.alpha(j, 0) = rhs[0][j];
        alpha.alpha(j, 1) = rhs[1][j];
        alpha.alpha(j, 2) = rhs[2][j];
    }
    return alpha;
}

}  // namespace kflow
