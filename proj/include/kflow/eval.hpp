// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "kflow/core.hpp"

namespace kflow {

struct MetricReport {
    double epe_m = 0.0;
    double acc5_pct = 0.0;
    double acc10_pct = 0.0;
    double angle_rad = 0.0;
    double time_s = 0.0;
};

/// Mean Euclidean norm of the per-point flow error, in meters.
double epe(const FlowField& pred, const FlowField& gt);

/// Percent of points whose error passes the absolute threshold OR whose
/// error relative to ||f_gt|| passes the relative threshold. The relative
/// branch is skipped for near-zero ground-truth vectors.
double accuracy(const FlowField& pred, const FlowField& gt, double abs_threshold,
                double rel_threshold);

/// Mean angle between predicted and ground-truth flow directions, radians.
/// Both near-zero: contributes 0; exactly one near-zero: contributes pi/2.
double angle_error(const FlowField& pred, const FlowField& gt);

/// Metric bundle with the conventional thresholds: strict (0.05 m, 5%) and
/// relaxed (0.1 m, 10%).
MetricReport compute_metrics(const FlowField& pred, const FlowField& gt, double time_s = 0.0);

/// Wall-clock seconds of a closure (the per-pair estimation pipeline).
double time_run(const std::function<void()>& fn);

/// Mean and variance of repeated timings.
struct TimingStats {
    double mean_s = 0.0;
    double variance_s2 = 0.0;
};
TimingStats time_repeated(const std::function<void()>& fn, std::size_t repeats);

}  // namespace kflow
