// SPDX-License-Identifier: Apache-2.0
#include "kflow/embed.hpp"

#include <algorithm>
#include <cmath>

#include "kflow/kdtree.hpp"
#include "kflow/parallel.hpp"
#include "kflow/rng.hpp"
#include "kflow/simd.hpp"

namespace kflow {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

// out = a * b, all row-major.
Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), b.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* arow = a.row(i);
        double* orow = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            simd::axpy(orow, arow[k], b.row(k), b.cols());
        }
    }
    return out;
}

void softmax_row(double* row, std::size_t n) {
    double mx = row[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        row[j] = std::exp(row[j] - mx);
        sum += row[j];
    }
    for (std::size_t j = 0; j < n; ++j) row[j] /= sum;
}
}  // namespace

std::string to_string(EmbeddingKind kind) {
    switch (kind) {
        case EmbeddingKind::Identity: return "identity";
        case EmbeddingKind::Rff: return "rff";
        case EmbeddingKind::Peat: return "peat";
        case EmbeddingKind::PeatKnn: return "peat-knn";
    }
    return "?";
}

EmbeddingKind embedding_kind_from_string(const std::string& name) {
    if (name == "identity") return EmbeddingKind::Identity;
    if (name == "rff") return EmbeddingKind::Rff;
    if (name == "peat") return EmbeddingKind::Peat;
    if (name == "peat-knn") return EmbeddingKind::PeatKnn;
    throw std::invalid_argument("unknown embedding kind '" + name + "'");
}

RffEncoder::RffEncoder(std::size_t output_dim, double beta, std::uint64_t seed)
    : dim_(output_dim), beta_(beta), seed_(seed) {
    if (dim_ == 0 || dim_ % 2 != 0) {
        throw std::invalid_argument("RffEncoder: output_dim must be a positive even integer");
    }
    if (!(beta_ > 0.0)) throw std::invalid_argument("RffEncoder: beta must be positive");
    freq_ = Matrix(dim_ / 2, 3);
    Rng rng(seed_);
    for (std::size_t i = 0; i < freq_.rows(); ++i) {
        for (std::size_t j = 0; j < 3; ++j) freq_(i, j) = rng.gaussian(0.0, beta_);
    }
}

void RffEncoder::encode_point(const Vec3& p, double* out) const {
    const std::size_t half = dim_ / 2;
    for (std::size_t i = 0; i < half; ++i) {
        const double* b = freq_.row(i);
        double phase = kTwoPi * (b[0] * p.x + b[1] * p.y + b[2] * p.z);
        out[i] = std::cos(phase);
        out[half + i] = std::sin(phase);
    }
}

void PeatWeights::validate() const {
    if (w_q.rows() != w_k.rows() || w_q.rows() != w_v.rows() || w_q.cols() != w_k.cols()) {
        throw std::invalid_argument("PeatWeights: inconsistent matrix shapes");
    }
    for (const Matrix* m : {&w_q, &w_k, &w_v}) {
        for (std::size_t i = 0; i < m->size(); ++i) {
            if (!std::isfinite(m->data()[i])) {
                throw std::invalid_argument("PeatWeights: non-finite entry");
            }
        }
    }
}

PeatWeights PeatWeights::random(std::size_t d_pe, std::size_t d_k, std::size_t d_v,
                                std::uint64_t seed) {
    Rng rng(seed);
    double scale = 1.0 / std::sqrt(static_cast<double>(d_pe));
    auto fill = [&](std::size_t r, std::size_t c) {
        Matrix m(r, c);
        for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.gaussian(0.0, scale);
        return m;
    };
    return PeatWeights{fill(d_pe, d_k), fill(d_pe, d_k), fill(d_pe, d_v)};
}

EmbeddedCloud embed_identity(const PointCloud& cloud) {
    Matrix rows(cloud.size(), 3);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        rows(i, 0) = cloud[i].x;
        rows(i, 1) = cloud[i].y;
        rows(i, 2) = cloud[i].z;
    }
    return {std::move(rows), EmbeddingKind::Identity};
}

EmbeddedCloud rff_encode(const PointCloud& cloud, const RffEncoder& encoder) {
    Matrix rows(cloud.size(), encoder.output_dim());
    parallel_chunks(cloud.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) encoder.encode_point(cloud[i], rows.row(i));
    });
    return {std::move(rows), EmbeddingKind::Rff};
}

EmbeddedCloud peat_forward(const PointCloud& cloud, const RffEncoder& pe,
                           const PeatWeights& weights) {
    weights.validate();
    if (pe.output_dim() != weights.d_pe()) {
        throw std::invalid_argument("peat_forward: PE width " + std::to_string(pe.output_dim()) +
                                    " != weight d_pe " + std::to_string(weights.d_pe()));
    }
    const std::size_t n = cloud.size();
    Matrix x = rff_encode(cloud, pe).rows;         // N x d_pe
    Matrix q = matmul(x, weights.w_q);             // N x d_k
    Matrix k = matmul(x, weights.w_k);             // N x d_k
    Matrix v = matmul(x, weights.w_v);             // N x d_v

    Matrix out(n, weights.d_v(), 0.0);
    parallel_chunks(n, [&](std::size_t b, std::size_t e) {
        std::vector<double> attn(n);
        for (std::size_t i = b; i < e; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                attn[j] = simd::dot(q.row(i), k.row(j), weights.d_k());
            }
            softmax_row(attn.data(), n);
            for (std::size_t j = 0; j < n; ++j) {
                simd::axpy(out.row(i), attn[j], v.row(j), weights.d_v());
            }
        }
    });
    return {std::move(out), EmbeddingKind::Peat};
}

Matrix peat_attention(const PointCloud& cloud, const RffEncoder& pe, const PeatWeights& weights) {
    weights.validate();
    if (pe.output_dim() != weights.d_pe()) {
        throw std::invalid_argument("peat_attention: PE width mismatch");
    }
    const std::size_t n = cloud.size();
    Matrix x = rff_encode(cloud, pe).rows;
    Matrix q = matmul(x, weights.w_q);
    Matrix k = matmul(x, weights.w_k);
    Matrix attn(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            attn(i, j) = simd::dot(q.row(i), k.row(j), weights.d_k());
        }
        softmax_row(attn.row(i), n);
    }
    return attn;
}

std::vector<std::size_t> knn_sample(const Vec3& query, const PointCloud& cloud, std::size_t L) {
    KdTree tree(cloud);
    auto hits = tree.knn(query, L);
    std::vector<std::size_t> out(hits.size());
    for (std::size_t i = 0; i < hits.size(); ++i) out[i] = hits[i].index;
    return out;
}

EmbeddedCloud peat_knn_forward(const PointCloud& cloud, const RffEncoder& pe,
                               const PeatWeights& weights, std::size_t L) {
    weights.validate();
    if (pe.output_dim() != weights.d_pe()) {
        throw std::invalid_argument("peat_knn_forward: PE width mismatch");
    }
    const std::size_t n = cloud.size();
    if (L < 1 || L > n) throw std::invalid_argument("peat_knn_forward: L must be in [1, N]");

    Matrix x = rff_encode(cloud, pe).rows;
    Matrix q = matmul(x, weights.w_q);
    Matrix k = matmul(x, weights.w_k);
    Matrix v = matmul(x, weights.w_v);
    KdTree tree(cloud);

    Matrix out(n, weights.d_v(), 0.0);
    parallel_chunks(n, [&](std::size_t b, std::size_t e) {
        std::vector<double> attn(L);
        for (std::size_t i = b; i < e; ++i) {
            auto hits = tree.knn(cloud[i], L);
            for (std::size_t j = 0; j < L; ++j) {
                attn[j] = simd::dot(q.row(i), k.row(hits[j].index), weights.d_k());
            }
            softmax_row(attn.data(), L);
            for (std::size_t j = 0; j < L; ++j) {
                simd::axpy(out.row(i), attn[j], v.row(hits[j].index), weights.d_v());
            }
        }
    });
    return {std::move(out), EmbeddingKind::PeatKnn};
}

}  // namespace kflow
