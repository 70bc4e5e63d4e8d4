// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "kflow/core.hpp"

namespace kflow {

enum class EmbeddingKind { Identity, Rff, Peat, PeatKnn };

std::string to_string(EmbeddingKind kind);
EmbeddingKind embedding_kind_from_string(const std::string& name);

/// N x D feature rows, one per source point, plus the provenance of the
/// embedding that produced them.
struct EmbeddedCloud {
    Matrix rows;
    EmbeddingKind kind;

    std::size_t count() const { return rows.rows(); }
    std::size_t dim() const { return rows.cols(); }
};

/// Random Fourier feature encoder: row(p) = [cos(2*pi*B*p) || sin(2*pi*B*p)],
/// B is (D/2) x 3 with i.i.d. Gaussian(0, beta^2) entries from a seeded
/// counter-based stream. Deterministic given (dim, beta, seed).
class RffEncoder {
  public:
    RffEncoder(std::size_t output_dim, double beta, std::uint64_t seed);

    std::size_t output_dim() const { return dim_; }
    double beta() const { return beta_; }
    std::uint64_t seed() const { return seed_; }
    const Matrix& frequencies() const { return freq_; }

    void encode_point(const Vec3& p, double* out) const;

  private:
    std::size_t dim_;
    double beta_;
    std::uint64_t seed_;
    Matrix freq_;  // D/2 x 3
};

/// Single-head attention weights over positional embeddings of width d_pe.
struct PeatWeights {
    Matrix w_q;  // d_pe x d_k
    Matrix w_k;  // d_pe x d_k
    Matrix w_v;  // d_pe x d_v

    std::size_t d_pe() const { return w_q.rows(); }
    std::size_t d_k() const { return w_q.cols(); }
    std::size_t d_v() const { return w_v.cols(); }

    void validate() const;

    /// Gaussian init with scale 1/sqrt(d_pe); stands in for trained weights.
    static PeatWeights random(std::size_t d_pe, std::size_t d_k, std::size_t d_v,
                              std::uint64_t seed);
};

EmbeddedCloud embed_identity(const PointCloud& cloud);
EmbeddedCloud rff_encode(const PointCloud& cloud, const RffEncoder& encoder);

/// Full self-attention over positional embeddings: for X = PE(cloud),
/// output = row_softmax(X Wq Wk^T X^T) X Wv.
EmbeddedCloud peat_forward(const PointCloud& cloud, const RffEncoder& pe,
                           const PeatWeights& weights);

/// The N x N row-softmaxed attention map of peat_forward. Every row sums
/// to 1; exposed so the invariant can be checked directly.
Matrix peat_attention(const PointCloud& cloud, const RffEncoder& pe, const PeatWeights& weights);

/// Indices of the L nearest cloud points to `query`, ascending distance,
/// ties toward the lower index. The query's own point is eligible.
std::vector<std::size_t> knn_sample(const Vec3& query, const PointCloud& cloud, std::size_t L);

/// Attention restricted to each point's L nearest neighbors; shrinks the
/// attention map from N^2 to N*L entries.
EmbeddedCloud peat_knn_forward(const PointCloud& cloud, const RffEncoder& pe,
                               const PeatWeights& weights, std::size_t L);

}  // namespace kflow
