// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "kflow/core.hpp"
#include "kflow/kernel.hpp"
#include "kflow/loss.hpp"

namespace kflow {

/// A data term over deformed source points: value plus gradient w.r.t. p'.
using DataTerm = std::function<LossReport(const PointCloud&)>;

DataTerm make_chamfer_term(const ChamferLoss& loss);
DataTerm make_dt_term(const DtLoss& loss);
/// Least-squares-to-target-flow term: mean_i ||p'_i - (p_i + f_gt_i)||^2.
/// Quadratic surrogate used by the closed-form comparisons.
DataTerm make_least_squares_term(const PointCloud& source, const FlowField& flow_gt);

struct OptimConfig {
    double learning_rate = 0.01;
    std::size_t max_iters = 500;
    double lambda_l1 = 1e-5;
    std::size_t early_stop_patience = 30;
    double early_stop_min_delta = 1e-4;  // relative best-loss improvement
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const;
};

struct TraceRecord {
    std::size_t iteration;
    double data_loss;
    double l1_term;
    double total;
    double wall_ms;
};

struct OptimTrace {
    std::vector<TraceRecord> records;
    std::string stop_reason;  // "max-iters" | "early-stop"
};

/// Eq-style objective: data(apply_coefficients(K, alpha)) + lambda * |alpha|_1.
/// Gradient over alpha is K^T * d(data)/d(p') + lambda * sign(alpha), with
/// sign(0) = 0.
struct Objective {
    double value;
    Matrix gradient;  // M x 3
};

Objective objective(const Matrix& kernel, const PointCloud& source, const CoefficientVector& alpha,
                    const DataTerm& data_term, double lambda_l1);

/// Adam over alpha, zero-initialized; returns the best-loss alpha seen.
/// Throws on a non-finite loss.
std::pair<CoefficientVector, OptimTrace> optimize_alpha(const Matrix& kernel,
                                                        const PointCloud& source,
                                                        const DataTerm& data_term,
                                                        const OptimConfig& config);

/// Ridge-regularized least squares: alpha solves (K^T K + delta I) alpha =
/// K^T f_gt, per flow component. Throws on a singular system when delta = 0.
CoefficientVector closed_form_alpha(const Matrix& kernel, const FlowField& flow_gt,
                                    double delta = 1e-8);

}  // namespace kflow
