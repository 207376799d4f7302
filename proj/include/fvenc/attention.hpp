#pragma once

#include <cstdint>

#include "fvenc/linalg.hpp"

namespace fvenc {

struct AttentionParams {
    Matrix w_q;  // f x d
    Matrix w_k;  // f x d
    Matrix w_v;  // f x d
};

// Projection weights drawn from a seeded uniform on [-1/sqrt(f), 1/sqrt(f)].
AttentionParams make_attention_params(Index input_dim, Index head_dim, std::uint64_t seed);

// N x N similarity matrices. Softmax rows always sum to 1; ReLU rows sum to
// 1 whenever the row's total ReLU product mass exceeds eps.
Matrix softmax_similarity(const Matrix& x, const AttentionParams& params);
Matrix relu_linear_similarity(const Matrix& x, const AttentionParams& params,
                              double eps = 1e-8);

// A = softmax(Q K^T / sqrt(d)) V with Q = xW_Q, K = xW_K, V = xW_V.
Matrix softmax_attention(const Matrix& x, const AttentionParams& params);

// Row-normalized ReLU similarity applied to V:
//   Sim_i = ReLU(Q_i) ReLU(K)^T / max(sum_j ReLU(Q_i).ReLU(K_j), eps)
// eps keeps the map total when all ReLU products in a row vanish.
Matrix relu_linear_attention(const Matrix& x, const AttentionParams& params,
                             double eps = 1e-8);

}  // namespace fvenc
