// SPDX-License-Identifier: Apache-2.0
#include "kflow/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace kflow {

namespace {
constexpr double kNormFloor = 1e-12;

void check_lengths(const FlowField& pred, const FlowField& gt, const char* what) {
    if (pred.size() != gt.size()) {
        throw std::invalid_argument(std::string(what) + ": flow length mismatch (" +
                                    std::to_string(pred.size()) + " vs " +
                                    std::to_string(gt.size()) + ")");
    }
    if (pred.size() == 0) throw std::invalid_argument(std::string(what) + ": empty flows");
}
}  // namespace

double epe(const FlowField& pred, const FlowField& gt) {
    check_lengths(pred, gt, "epe");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) sum += (pred[i] - gt[i]).norm();
    return sum / static_cast<double>(pred.size());
}

double accuracy(const FlowField& pred, const FlowField& gt, double abs_threshold,
                double rel_threshold) {
    check_lengths(pred, gt, "accuracy");
    if (!(abs_threshold > 0.0) || !(rel_threshold > 0.0)) {
        throw std::invalid_argument("accuracy: thresholds must be positive");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double err = (pred[i] - gt[i]).norm();
        double gt_norm = gt[i].norm();
        bool ok = err < abs_threshold;
        if (!ok && gt_norm >= kNormFloor) ok = err / gt_norm < rel_threshold;
        if (ok) ++hits;
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(pred.size());
}

double angle_error(const FlowField& pred, const FlowField& gt) {
    check_lengths(pred, gt, "angle_error");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double np = pred[i].norm();
        double ng = gt[i].norm();
        if (np < kNormFloor && ng < kNormFloor) continue;  // both static: 0
        if (np < kNormFloor || ng < kNormFloor) {
            sum += 1.5707963267948966;  // exactly one static: pi/2
            continue;
        }
        double c = pred[i].dot(gt[i]) / (np * ng);
        sum += std::acos(std::clamp(c, -1.0, 1.0));
    }
    return sum / static_cast<double>(pred.size());
}

MetricReport compute_metrics(const FlowField& pred, const FlowField& gt, double time_s) {
    MetricReport r;
    r.epe_m = epe(pred, gt);
    r.acc5_pct = accuracy(pred, gt, 0.05, 0.05);
    r.acc10_pct = accuracy(pred, gt, 0.10, 0.10);
    r.angle_rad = angle_error(pred, gt);
    r.time_s = time_s;
    return r;
}

double time_run(const std::function<void()>& fn) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

TimingStats time_repeated(const std::function<void()>& fn, std::size_t repeats) {
    if (repeats == 0) throw std::invalid_argument("time_repeated: repeats must be >= 1");
    TimingStats s;
    std::vector<double> samples(repeats);
    for (std::size_t i = 0; i < repeats; ++i) samples[i] = time_run(fn);
    for (double v : samples) s.mean_s += v;
    s.mean_s /= static_cast<double>(repeats);
    for (double v : samples) s.variance_s2 += (v - s.mean_s) * (v - s.mean_s);
    s.variance_s2 /= static_cast<double>(repeats);
    return s;
}

}  // namespace kflow
