// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "kflow/core.hpp"
#include "kflow/embed.hpp"
#include "kflow/eval.hpp"
#include "kflow/kernel.hpp"
#include "kflow/optimize.hpp"

namespace kflow {

enum class LossKind { ChamferForward, ChamferBidirectional, Dt };

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

enum class SupportSource { Grid, TargetPoints };

/// Everything a single estimation run needs. Defaults are tuned for
/// urban-scale synthetic scenes and overridable from the CLI or a JSON
/// config file.
struct RunConfig {
    EmbeddingKind embedding = EmbeddingKind::Identity;
    std::size_t rff_dim = 128;
    double rff_beta = 0.1;
    std::size_t peat_d_k = 32;
    std::size_t peat_d_v = 32;
    std::size_t peat_knn = 16;
    std::string peat_weights_path;  // empty: seeded random init

    KernelFamily kernel = KernelFamily::Rbf;
    double sigma = 0.0;  // <= 0 selects an embedding-dependent default
    bool sinc_squared = true;

    SupportSource support = SupportSource::Grid;
    double support_spacing = 3.0;
    std::size_t support_max_per_axis = 32;
    double support_padding = 1.0;

    LossKind loss = LossKind::Dt;
    double dt_spacing = 0.05;
    double dt_padding = 2.0;

    OptimConfig optim;
    std::uint64_t seed = 0;

    void validate() const;

    /// Resolved sigma for this embedding/kernel combination.
    double effective_sigma() const;

    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
    /// Overlays the non-null fields of `j` onto this config.
    void merge_json(const nlohmann::json& j);
};

struct EstimateResult {
    FlowField flow;
    OptimTrace trace;
    double time_s = 0.0;        // embedding + kernel build + optimization
    std::size_t support_count = 0;
    double sigma_used = 0.0;
};

/// Runs the full per-pair pipeline: embed, build supports and kernel matrix,
/// optimize coefficients, apply them.
EstimateResult estimate_pair(const PointCloud& source, const PointCloud& target,
                             const RunConfig& config);

/// Per-sample metrics plus a mean block for a list of (source, target,
/// optional gt) samples. Wall-clock fields are the only nondeterminism.
struct BenchmarkSample {
    std::string id;
    std::string source;
    std::string target;
    std::optional<std::string> gt_flow;
};

nlohmann::json run_benchmark(const std::vector<BenchmarkSample>& samples, const RunConfig& config);

}  // namespace kflow
