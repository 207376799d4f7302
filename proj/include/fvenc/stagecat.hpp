#pragma once

#include <optional>
#include <vector>

#include "fvenc/backbone.hpp"
#include "fvenc/linalg.hpp"

namespace fvenc {

struct SplitPlan {
    std::vector<int> stage_dims;
    int common_dim = 0;            // gcd of stage dims unless overridden
    std::vector<int> chunk_counts; // stage_dims[i] / common_dim
};

// common_dim defaults to gcd(stage dims); an explicit override must still
// divide every stage dim.
SplitPlan make_plan(const std::vector<int>& stage_dims,
                    std::optional<int> common_dim_override = std::nullopt);

// Cuts each d_i-dimensional token into c_i contiguous chunks of width d and
// stacks them. Rows are ordered (stage, token, chunk); the total row count is
// sum_i N_i * c_i. Every scalar survives unchanged.
Matrix merge(const std::vector<StageFeatures>& features, const SplitPlan& plan);

// Exact inverse of merge. stage_indices, when given, are restored onto the
// output; otherwise stages are numbered 1..n.
std::vector<StageFeatures> unmerge(const Matrix& merged, const SplitPlan& plan,
                                   const std::vector<int>& token_counts,
                                   const std::vector<int>& stage_indices = {});

}  // namespace fvenc
