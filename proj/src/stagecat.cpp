#include "fvenc/stagecat.hpp"

#include <numeric>
#include <string>

#include "fvenc/errors.hpp"

namespace fvenc {

SplitPlan make_plan(const std::vector<int>& stage_dims, std::optional<int> common_dim_override) {
    if (stage_dims.empty()) throw ConfigError("plan needs at least one stage dim");
    for (int d : stage_dims)
        if (d < 1) throw ConfigError("stage dims must be >= 1");

    SplitPlan plan;
    plan.stage_dims = stage_dims;
    if (common_dim_override) {
        plan.common_dim = *common_dim_override;
        if (plan.common_dim < 1) throw ConfigError("common dim override must be >= 1");
        for (int d : stage_dims)
            if (d % plan.common_dim != 0)
                throw ConfigError("common dim " + std::to_string(plan.common_dim) +
                                  " does not divide stage dim " + std::to_string(d));
    } else {
        plan.common_dim = 0;
        for (int d : stage_dims) plan.common_dim = std::gcd(plan.common_dim, d);
    }
    plan.chunk_counts.reserve(stage_dims.size());
    for (int d : stage_dims) plan.chunk_counts.push_back(d / plan.common_dim);
    return plan;
}

Matrix merge(const std::vector<StageFeatures>& features, const SplitPlan& plan) {
    if (features.size() != plan.stage_dims.size())
        throw PlanMismatch("plan covers " + std::to_string(plan.stage_dims.size()) +
                           " stages, got " + std::to_string(features.size()));
    Index total_rows = 0;
    for (std::size_t s = 0; s < features.size(); ++s) {
        if (features[s].tokens.cols() != plan.stage_dims[s])
            throw PlanMismatch("stage " + std::to_string(s) + " has dim " +
                               std::to_string(features[s].tokens.cols()) + ", plan expects " +
                               std::to_string(plan.stage_dims[s]));
        total_rows += features[s].tokens.rows() * plan.chunk_counts[s];
    }

    Matrix merged(total_rows, plan.common_dim);
    Index row = 0;
    for (std::size_t s = 0; s < features.size(); ++s) {
        const Matrix& tokens = features[s].tokens;
        const int chunks = plan.chunk_counts[s];
        for (Index t = 0; t < tokens.rows(); ++t)
            for (int c = 0; c < chunks; ++c, ++row)
                merged.row(row) = tokens.row(t).segment(static_cast<Index>(c) * plan.common_dim,
                                                        plan.common_dim);
    }
    return merged;
}

std::vector<StageFeatures> unmerge(const Matrix& merged, const SplitPlan& plan,
                                   const std::vector<int>& token_counts,
                                   const std::vector<int>& stage_indices) {
    if (token_counts.size() != plan.stage_dims.size())
        throw PlanMismatch("token_counts does not cover every stage");
    if (!stage_indices.empty() && stage_indices.size() != token_counts.size())
        throw PlanMismatch("stage_indices does not cover every stage");
    if (merged.cols() != plan.common_dim)
        throw SizeMismatch("merged width " + std::to_string(merged.cols()) +
                           " != common dim " + std::to_string(plan.common_dim));

    Index expected_rows = 0;
    for (std::size_t s = 0; s < token_counts.size(); ++s)
        expected_rows += static_cast<Index>(token_counts[s]) * plan.chunk_counts[s];
    if (merged.rows() != expected_rows)
        throw SizeMismatch("merged has " + std::to_string(merged.rows()) + " rows, expected " +
                           std::to_string(expected_rows));

    std::vector<StageFeatures> features(token_counts.size());
    Index row = 0;
    for (std::size_t s = 0; s < token_counts.size(); ++s) {
        const int chunks = plan.chunk_counts[s];
        StageFeatures& stage = features[s];
        stage.stage_index = stage_indices.empty() ? static_cast<int>(s) + 1 : stage_indices[s];
        stage.tokens.resize(token_counts[s], plan.stage_dims[s]);
        for (Index t = 0; t < stage.tokens.rows(); ++t)
            for (int c = 0; c < chunks; ++c, ++row)
                stage.tokens.row(t).segment(static_cast<Index>(c) * plan.common_dim,
                                            plan.common_dim) = merged.row(row);
    }
    return features;
}

}  // namespace fvenc
