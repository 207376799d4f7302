#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fvenc/gmm.hpp"
#include "fvenc/linalg.hpp"
#include "fvenc/manifest.hpp"

namespace fvenc {

// Blob-image task: one Gaussian-intensity blob per image whose location and
// size depend on the class, plus seeded noise and per-image jitter. Classes
// differ in local second-order statistics, so the encoding pipeline can
// separate them without any pretrained weights.
struct BlobSpec {
    int classes = 2;
    int width = 28;
    int height = 28;
    int train_count = 100;  // totals across classes, split round-robin
    int val_count = 20;
    int test_count = 40;
    double noise = 0.05;
    std::uint64_t seed = 0;
};

struct BlobDataset {
    std::filesystem::path train_manifest;
    std::filesystem::path val_manifest;
    std::filesystem::path test_manifest;
    int files_written = 0;
};

BlobDataset gen_blob_images(const BlobSpec& spec, const std::filesystem::path& out_dir);

struct PlantedSpec {
    int components = 4;
    int dim = 2;
    std::vector<int> counts;       // per component; empty means `total` split evenly
    int total = 0;                 // used when counts is empty
    double center_range = 5.0;     // centers drawn uniform in [-range, range]^d
    double min_sigma = 0.5;
    double max_sigma = 1.5;
    std::uint64_t seed = 0;
};

struct PlantedMixture {
    Matrix samples;  // rows grouped by component, shuffled
    DiagGmm truth;
    std::vector<int> component_of_row;
};

// Draws from a randomly parameterized mixture and returns the exact
// generating parameters for oracle checks.
PlantedMixture gen_planted_mixture(const PlantedSpec& spec);

BlobSpec blob_spec_from_json_file(const std::filesystem::path& path);

}  // namespace fvenc
