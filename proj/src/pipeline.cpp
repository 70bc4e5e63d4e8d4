// SPDX-License-Identifier: Apache-2.0
#include "kflow/pipeline.hpp"

#include <chrono>
#include <cmath>

#include "kflow/io.hpp"
#include "kflow/loss.hpp"

namespace kflow {

std::string to_string(LossKind kind) {
    switch (kind) {
        case LossKind::ChamferForward: return "chamfer";
        case LossKind::ChamferBidirectional: return "chamfer-bi";
        case LossKind::Dt: return "dt";
    }
    return "?";
}

LossKind loss_kind_from_string(const std::string& name) {
    if (name == "chamfer") return LossKind::ChamferForward;
    if (name == "chamfer-bi") return LossKind::ChamferBidirectional;
    if (name == "dt") return LossKind::Dt;
    throw std::invalid_argument("unknown loss '" + name + "'");
}

void RunConfig::validate() const {
    optim.validate();
    if (rff_dim == 0 || rff_dim % 2 != 0) {
        throw std::invalid_argument("RunConfig: rff_dim must be a positive even integer");
    }
    if (!(rff_beta > 0.0)) throw std::invalid_argument("RunConfig: rff_beta <= 0");
    if (!(support_spacing > 0.0)) throw std::invalid_argument("RunConfig: support_spacing <= 0");
    if (!(dt_spacing > 0.0)) throw std::invalid_argument("RunConfig: dt_spacing <= 0");
    if (support_padding < 0.0 || dt_padding < 0.0) {
        throw std::invalid_argument("RunConfig: paddings must be >= 0");
    }
    if (peat_knn == 0) throw std::invalid_argument("RunConfig: peat_knn must be >= 1");
}

double RunConfig::effective_sigma() const {
    if (sigma > 0.0) return sigma;
    const bool feature_space = embedding != EmbeddingKind::Identity;
    switch (kernel) {
        case KernelFamily::Rbf:
        case KernelFamily::Laplacian:
            if (feature_space) return std::sqrt(static_cast<double>(rff_dim)) / 4.0;
            return support_spacing;
        case KernelFamily::Sinc:
            // sigma * d^2 should stay below the first zero (d = 1) out to
            // roughly one support spacing.
            if (feature_space) return 1.0 / static_cast<double>(rff_dim);
            return 0.5 / (support_spacing * support_spacing);
        default:
            // Inner-product gain; resolved from the data at run time.
            return 1.0;
    }
}

nlohmann::json RunConfig::to_json() const {
    return nlohmann::json{
        {"embedding", to_string(embedding)},
        {"rff_dim", rff_dim},
        {"rff_beta", rff_beta},
        {"peat_d_k", peat_d_k},
        {"peat_d_v", peat_d_v},
        {"peat_knn", peat_knn},
        {"peat_weights_path", peat_weights_path},
        {"kernel", to_string(kernel)},
        {"sigma", sigma},
        {"sigma_effective", effective_sigma()},
        {"sinc_squared", sinc_squared},
        {"support", support == SupportSource::Grid ? "grid" : "target-points"},
        {"support_spacing", support_spacing},
        {"support_max_per_axis", support_max_per_axis},
        {"support_padding", support_padding},
        {"loss", to_string(loss)},
        {"dt_spacing", dt_spacing},
        {"dt_padding", dt_padding},
        {"learning_rate", optim.learning_rate},
        {"max_iters", optim.max_iters},
        {"lambda_l1", optim.lambda_l1},
        {"early_stop_patience", optim.early_stop_patience},
        {"early_stop_min_delta", optim.early_stop_min_delta},
        {"seed", seed},
    };
}

void RunConfig::merge_json(const nlohmann::json& j) {
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key) && !j[key].is_null()) {
            field = j[key].get<std::decay_t<decltype(field)>>();
        }
    };
    if (j.contains("embedding")) embedding = embedding_kind_from_string(j["embedding"]);
    get("rff_dim", rff_dim);
    get("rff_beta", rff_beta);
    get("peat_d_k", peat_d_k);
    get("peat_d_v", peat_d_v);
    get("peat_knn", peat_knn);
    get("peat_weights_path", peat_weights_path);
    if (j.contains("kernel")) kernel = kernel_family_from_string(j["kernel"]);
    get("sigma", sigma);
    get("sinc_squared", sinc_squared);
    if (j.contains("support")) {
        std::string s = j["support"];
        if (s == "grid") {
            support = SupportSource::Grid;
        } else if (s == "target-points") {
            support = SupportSource::TargetPoints;
        } else {
            throw std::invalid_argument("unknown support source '" + s + "'");
        }
    }
    get("support_spacing", support_spacing);
    get("support_max_per_axis", support_max_per_axis);
    get("support_padding", support_padding);
    if (j.contains("loss")) loss = loss_kind_from_string(j["loss"]);
    get("dt_spacing", dt_spacing);
    get("dt_padding", dt_padding);
    get("learning_rate", optim.learning_rate);
    get("max_iters", optim.max_iters);
    get("lambda_l1", optim.lambda_l1);
    get("early_stop_patience", optim.early_stop_patience);
    get("early_stop_min_delta", optim.early_stop_min_delta);
    get("seed", seed);
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig c;
    c.merge_json(j);
    return c;
}

namespace {

struct EmbeddedPair {
    EmbeddedCloud source;
    EmbeddedCloud support;
};

EmbeddedPair embed_for_run(const PointCloud& source, const PointCloud& target,
                           const SupportSet& supports, const RunConfig& cfg) {
    switch (cfg.embedding) {
        case EmbeddingKind::Identity: {
            return {embed_identity(source), embed_identity(supports.as_cloud())};
        }
        case EmbeddingKind::Rff: {
            RffEncoder enc(cfg.rff_dim, cfg.rff_beta, cfg.seed);
            return {rff_encode(source, enc), rff_encode(supports.as_cloud(), enc)};
        }
        case EmbeddingKind::Peat:
        case EmbeddingKind::PeatKnn: {
            RffEncoder enc(cfg.rff_dim, cfg.rff_beta, cfg.seed);
            PeatWeights weights =
                cfg.peat_weights_path.empty()
                    ? PeatWeights::random(cfg.rff_dim, cfg.peat_d_k, cfg.peat_d_v, cfg.seed + 1)
                    : io::read_peat_weights(cfg.peat_weights_path);
            // Supports are the raw target points; attention runs once per
            // cloud, so support rows come from the target's own forward pass.
            if (cfg.embedding == EmbeddingKind::Peat) {
                return {peat_forward(source, enc, weights), peat_forward(target, enc, weights)};
            }
            auto clamp_l = [&](std::size_t n) { return std::min(cfg.peat_knn, n); };
            return {peat_knn_forward(source, enc, weights, clamp_l(source.size())),
                    peat_knn_forward(target, enc, weights, clamp_l(target.size()))};
        }
    }
    throw std::logic_error("embed_for_run: unreachable");
}

// Gain for the inner-product kernels when sigma is left at auto: the
// reciprocal RMS inner product over a strided sample, so arguments land
// around +-1 instead of saturating.
double auto_gain(const EmbeddedCloud& source, const EmbeddedCloud& support) {
    const std::size_t n = source.count();
    const std::size_t m = support.count();
    const std::size_t d = source.dim();
    const std::size_t si = std::max<std::size_t>(1, n / 64);
    const std::size_t sj = std::max<std::size_t>(1, m / 64);
    double sum = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < n; i += si) {
        for (std::size_t j = 0; j < m; j += sj) {
            double ip = 0.0;
            const double* a = source.rows.row(i);
            const double* b = support.rows.row(j);
            for (std::size_t k = 0; k < d; ++k) ip += a[k] * b[k];
            sum += ip * ip;
            ++cnt;
        }
    }
    double rms = std::sqrt(sum / static_cast<double>(cnt));
    return rms > 0.0 ? 1.0 / rms : 1.0;
}

}  // namespace

EstimateResult estimate_pair(const PointCloud& source, const PointCloud& target,
                             const RunConfig& config) {
    config.validate();
    auto t0 = std::chrono::steady_clock::now();

    const bool peat_family =
        config.embedding == EmbeddingKind::Peat || config.embedding == EmbeddingKind::PeatKnn;
    SupportSet supports =
        (config.support == SupportSource::TargetPoints || peat_family)
            ? target_supports(target)
            : grid_supports_from_spacing(bounding_box(source, target, config.support_padding),
                                         config.support_spacing, config.support_max_per_axis);

    EmbeddedPair embedded = embed_for_run(source, target, supports, config);

    const bool inner_product = config.kernel == KernelFamily::Softmax ||
                               config.kernel == KernelFamily::Sigmoid ||
                               config.kernel == KernelFamily::Tanh;
    double sigma = config.sigma;
    if (sigma <= 0.0) {
        sigma = inner_product ? auto_gain(embedded.source, embedded.support)
                              : config.effective_sigma();
    }
    KernelKind kind{config.kernel, sigma, config.sinc_squared};
    Matrix kernel = kernel_matrix(embedded.source, embedded.support, kind);

    FlowField flow = FlowField::zeros(source.size());
    OptimTrace trace;
    if (config.optim.max_iters == 0) {
        trace.stop_reason = "max-iters";
    } else if (config.loss == LossKind::Dt) {
        DtLoss loss(target, bounding_box(source, target, config.dt_padding), config.dt_spacing);
        auto [alpha, tr] = optimize_alpha(kernel, source, make_dt_term(loss), config.optim);
        flow = apply_coefficients(kernel, alpha);
        trace = std::move(tr);
    } else {
        ChamferLoss loss(target, config.loss == LossKind::ChamferBidirectional);
        auto [alpha, tr] = optimize_alpha(kernel, source, make_chamfer_term(loss), config.optim);
        flow = apply_coefficients(kernel, alpha);
        trace = std::move(tr);
    }

    double time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return EstimateResult{std::move(flow), std::move(trace), time_s, supports.count(),
                          kind.sigma};
}

nlohmann::json run_benchmark(const std::vector<BenchmarkSample>& samples,
                             const RunConfig& config) {
    nlohmann::json out;
    out["config"] = config.to_json();
    out["samples"] = nlohmann::json::array();

    double sum_epe = 0, sum_acc5 = 0, sum_acc10 = 0, sum_angle = 0, sum_time = 0;
    std::size_t with_gt = 0;

    for (const auto& s : samples) {
        PointCloud source = io::read_points(s.source);
        PointCloud target = io::read_points(s.target);
        EstimateResult res = estimate_pair(source, target, config);

        nlohmann::json rec{{"id", s.id},
                           {"points", source.size()},
                           {"supports", res.support_count},
                           {"iterations", res.trace.records.size()},
                           {"stop_reason", res.trace.stop_reason},
                           {"time_s", res.time_s}};
        if (!res.trace.records.empty()) {
            rec["final_loss"] = res.trace.records.back().total;
        }
        if (s.gt_flow) {
            FlowField gt = io::read_flow(*s.gt_flow);
            MetricReport m = compute_metrics(res.flow, gt, res.time_s);
            rec["epe_m"] = m.epe_m;
            rec["acc5_pct"] = m.acc5_pct;
            rec["acc10_pct"] = m.acc10_pct;
            rec["angle_rad"] = m.angle_rad;
            sum_epe += m.epe_m;
            sum_acc5 += m.acc5_pct;
            sum_acc10 += m.acc10_pct;
            sum_angle += m.angle_rad;
            ++with_gt;
        } else {
            rec["warning"] = "no ground truth; metrics limited to time_s";
        }
        sum_time += res.time_s;
        out["samples"].push_back(std::move(rec));
    }

    nlohmann::json mean{{"time_s", samples.empty() ? 0.0 : sum_time / samples.size()}};
    if (with_gt > 0) {
        mean["epe_m"] = sum_epe / with_gt;
        mean["acc5_pct"] = sum_acc5 / with_gt;
        mean["acc10_pct"] = sum_acc10 / with_gt;
        mean["angle_rad"] = sum_angle / with_gt;
    }
    out["mean"] = std::move(mean);
    return out;
}

}  // namespace kflow
