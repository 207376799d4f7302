#pragma once

#include <cstdint>
#include <vector>

#include "fvenc/attention.hpp"
#include "fvenc/image.hpp"
#include "fvenc/linalg.hpp"

namespace fvenc {

enum class AttentionKind { softmax, relu_linear };

struct StageSpec {
    int stage_index = 0;  // position in the backbone, 1-based
    int patch_size = 0;   // square (cubic for volumes) non-overlapping patches
    int dim = 0;          // token dimension produced by this stage
};

struct BackboneConfig {
    std::vector<StageSpec> stages;
    AttentionKind kind = AttentionKind::relu_linear;
    std::uint64_t seed = 0;
    double eps = 1e-8;
};

struct StageFeatures {
    int stage_index = 0;
    Matrix tokens;  // N x d
};

// Seeded stand-in for a pretrained multi-stage extractor: per stage,
// patchify, project patches through a fixed random matrix, run one
// attention block. Pure function of (image, config).
std::vector<StageFeatures> extract_stages(const GrayImage& image, const BackboneConfig& config);

}  // namespace fvenc
