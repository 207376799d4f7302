#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fvenc/backbone.hpp"
#include "fvenc/classifier.hpp"
#include "fvenc/gmm.hpp"
#include "fvenc/metrics.hpp"

namespace fvenc {

struct PipelineConfig {
    std::filesystem::path train_manifest;
    std::filesystem::path val_manifest;
    std::filesystem::path test_manifest;
    std::filesystem::path out_dir;

    int stages = 2;  // how many of the configured backbone stages to use, later first
    int bins = 256;
    int sample_cap = 5000;

    BackboneConfig backbone;  // full stage family; `stages` picks the suffix
    int gmm_components = 16;
    EmOptions gmm_opts;
    double fv_alpha = 0.5;
    TrainConfig classifier;
    TiePolicy tie_policy = TiePolicy::half;

    std::size_t kl_samples = 1000000;
    std::uint64_t kl_seed = 0;
    int threads = 1;
};

// Parses the JSON config; unspecified fields keep the defaults above.
PipelineConfig pipeline_config_from_json_file(const std::filesystem::path& path);

// Cheap validation that runs before any work (cap >= K, stage count within
// the configured family, manifests present, ...).
void validate_pipeline_config(const PipelineConfig& config);

// Stage selection: the last `stages` entries of the configured family.
std::vector<StageSpec> selected_stages(const PipelineConfig& config);

// FNV-1a 64 over canonical (sorted-key, compact) JSON bytes; hex string.
// Embedded in every artifact filename for cache keying.
std::string config_hash(const PipelineConfig& config);

struct PipelineResult {
    MetricsReport report;
    std::filesystem::path report_path;
    std::filesystem::path run_log_path;
    std::string hash;
};

// extract -> rank -> gmm-fit -> encode -> train -> eval. Artifacts carry the
// config hash; a stage whose outputs already exist is reused as-is. Test
// images and labels are first touched inside the eval stage, and the run log
// records every path read per stage so that can be audited.
PipelineResult run_pipeline(const PipelineConfig& config);

struct StudyRow {
    double ratio = 0.0;
    std::uint64_t seed = 0;
    double kl = 0.0;
    double std_error = 0.0;
};

// Subsampling robustness: fit a base GMM on all rows, then per (ratio, seed)
// fit on the leading `ratio` fraction of groups and measure kl_mc(base, fit).
// `groups` delimits rows that must stay together (per-sample features);
// feature-matrix callers pass one row per group.
std::vector<StudyRow> run_subsample_study_grouped(
    const Matrix& features, const std::vector<Index>& group_offsets, int components,
    const EmOptions& base_opts, const std::vector<double>& ratios,
    const std::vector<std::uint64_t>& seeds, std::size_t mc_samples, std::uint64_t mc_seed,
    int threads = 1);

std::vector<StudyRow> run_subsample_study_features(const Matrix& features, int components,
                                                   const EmOptions& base_opts,
                                                   const std::vector<double>& ratios,
                                                   const std::vector<std::uint64_t>& seeds,
                                                   std::size_t mc_samples,
                                                   std::uint64_t mc_seed, int threads = 1);

// Manifest-driven variant: groups are entropy-ranked training samples.
std::vector<StudyRow> run_subsample_study(const PipelineConfig& config,
                                          const std::vector<double>& ratios,
                                          const std::vector<std::uint64_t>& seeds);

void save_study(const std::vector<StudyRow>& rows, const std::filesystem::path& json_path,
                const std::filesystem::path& csv_path);

}  // namespace fvenc
