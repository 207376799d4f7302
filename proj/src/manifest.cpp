#include "fvenc/manifest.hpp"

#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "fvenc/errors.hpp"

namespace fvenc {

std::string to_string(Task task) {
    switch (task) {
        case Task::binary: return "binary";
        case Task::multiclass: return "multiclass";
        case Task::multilabel: return "multilabel";
    }
    return "unknown";
}

Task task_from_string(const std::string& name) {
    if (name == "binary") return Task::binary;
    if (name == "multiclass") return Task::multiclass;
    if (name == "multilabel") return Task::multilabel;
    throw ConfigError("unknown task '" + name + "'");
}

void validate_manifest(const DatasetManifest& manifest, bool check_paths) {
    if (manifest.num_labels < 1) throw ConfigError("num_labels must be positive");
    if (manifest.task == Task::binary && manifest.num_labels != 1)
        throw ConfigError("binary task requires num_labels == 1");

    std::unordered_set<std::string> seen;
    for (const Sample& sample : manifest.samples) {
        if (!seen.insert(sample.id).second)
            throw DuplicateId("sample id '" + sample.id + "' appears twice");

        switch (manifest.task) {
            case Task::binary:
                if (sample.labels.size() != 1 ||
                    (sample.labels[0] != 0 && sample.labels[0] != 1))
                    throw LabelOutOfRange("sample '" + sample.id +
                                          "': binary label must be a single 0/1");
                break;
            case Task::multiclass:
                if (sample.labels.size() != 1 || sample.labels[0] < 0 ||
                    sample.labels[0] >= manifest.num_labels)
                    throw LabelOutOfRange("sample '" + sample.id +
                                          "': class label out of [0, num_labels)");
                break;
            case Task::multilabel:
                if (static_cast<int>(sample.labels.size()) != manifest.num_labels)
                    throw LabelOutOfRange("sample '" + sample.id +
                                          "': expected one 0/1 entry per label");
                for (int v : sample.labels)
                    if (v != 0 && v != 1)
                        throw LabelOutOfRange("sample '" + sample.id +
                                              "': multilabel entries must be 0/1");
                break;
        }

        if (check_paths) {
            if (sample.image_path &&
                !std::filesystem::exists(manifest.resolve(*sample.image_path)))
                throw MissingPath("sample '" + sample.id + "': " +
                                  sample.image_path->string());
            for (const auto& p : sample.stage_feature_paths)
                if (!std::filesystem::exists(manifest.resolve(p)))
                    throw MissingPath("sample '" + sample.id + "': " + p.string());
        }
    }
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingPath("cannot open manifest " + path.string());

    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("manifest " + path.string() + " is not valid JSON: " + e.what());
    }

    DatasetManifest manifest;
    manifest.base_dir = path.has_parent_path() ? path.parent_path()
                                               : std::filesystem::path(".");
    try {
        manifest.task = task_from_string(doc.at("task").get<std::string>());
        manifest.num_labels = doc.at("num_labels").get<int>();
        for (const auto& item : doc.at("samples")) {
            Sample sample;
            sample.id = item.at("id").get<std::string>();
            if (item.contains("image_path"))
                sample.image_path = std::filesystem::path(item["image_path"].get<std::string>());
            if (item.contains("stage_feature_paths"))
                for (const auto& p : item["stage_feature_paths"])
                    sample.stage_feature_paths.emplace_back(p.get<std::string>());
            sample.labels = item.at("labels").get<std::vector<int>>();
            manifest.samples.push_back(std::move(sample));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("manifest " + path.string() + " has a bad field: " + e.what());
    }

    validate_manifest(manifest, /*check_paths=*/true);
    return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    validate_manifest(manifest, /*check_paths=*/false);
    nlohmann::ordered_json doc;
    doc["task"] = to_string(manifest.task);
    doc["num_labels"] = manifest.num_labels;
    doc["samples"] = nlohmann::ordered_json::array();
    for (const Sample& sample : manifest.samples) {
        nlohmann::ordered_json item;
        item["id"] = sample.id;
        if (sample.image_path) item["image_path"] = sample.image_path->generic_string();
        if (!sample.stage_feature_paths.empty()) {
            item["stage_feature_paths"] = nlohmann::ordered_json::array();
            for (const auto& p : sample.stage_feature_paths)
                item["stage_feature_paths"].push_back(p.generic_string());
        }
        item["labels"] = sample.labels;
        doc["samples"].push_back(std::move(item));
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw MissingPath("cannot open " + path.string() + " for writing");
    out << doc.dump(2) << "\n";
}

}  // namespace fvenc
