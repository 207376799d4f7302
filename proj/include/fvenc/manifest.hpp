#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fvenc {

enum class Task { binary, multiclass, multilabel };

std::string to_string(Task task);
Task task_from_string(const std::string& name);

struct Sample {
    std::string id;
    std::optional<std::filesystem::path> image_path;
    std::vector<std::filesystem::path> stage_feature_paths;
    // binary: {0|1}; multiclass: {class index}; multilabel: one 0/1 per label
    std::vector<int> labels;
};

struct DatasetManifest {
    Task task = Task::binary;
    int num_labels = 1;
    std::vector<Sample> samples;
    // Directory the manifest was loaded from; relative sample paths resolve
    // against it.
    std::filesystem::path base_dir;

    std::filesystem::path resolve(const std::filesystem::path& p) const {
        return p.is_absolute() ? p : base_dir / p;
    }
};

// Loads and validates a JSON manifest. Paths referenced by samples must exist.
DatasetManifest load_manifest(const std::filesystem::path& path);

// Writes the manifest as JSON, sample order preserved.
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

// Label-shape checks shared by load_manifest and in-memory construction.
void validate_manifest(const DatasetManifest& manifest, bool check_paths);

}  // namespace fvenc
