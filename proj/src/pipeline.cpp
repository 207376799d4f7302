#include "fvenc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <string>
#include <unordered_map>

#include <json.hpp>

#include "fvenc/entropy.hpp"
#include "fvenc/errors.hpp"
#include "fvenc/fisher.hpp"
#include "fvenc/kl.hpp"
#include "fvenc/parallel.hpp"
#include "fvenc/rng.hpp"
#include "fvenc/stagecat.hpp"
#include "fvenc/tensor_io.hpp"

namespace fvenc {

namespace {

nlohmann::json backbone_to_json(const BackboneConfig& backbone) {
    nlohmann::json doc;
    doc["kind"] = backbone.kind == AttentionKind::softmax ? "softmax" : "relu_linear";
    doc["seed"] = backbone.seed;
    doc["eps"] = backbone.eps;
    doc["stages"] = nlohmann::json::array();
    for (const StageSpec& stage : backbone.stages)
        doc["stages"].push_back(
            {{"stage", stage.stage_index}, {"patch", stage.patch_size}, {"dim", stage.dim}});
    return doc;
}

BackboneConfig backbone_from_json(const nlohmann::json& doc) {
    BackboneConfig backbone;
    const std::string kind = doc.value("kind", "relu_linear");
    if (kind == "softmax")
        backbone.kind = AttentionKind::softmax;
    else if (kind == "relu_linear")
        backbone.kind = AttentionKind::relu_linear;
    else
        throw ConfigError("unknown attention kind '" + kind + "'");
    backbone.seed = doc.value("seed", std::uint64_t{0});
    backbone.eps = doc.value("eps", 1e-8);
    if (doc.contains("stages")) {
        backbone.stages.clear();
        for (const auto& item : doc.at("stages")) {
            StageSpec stage;
            stage.stage_index = item.at("stage").get<int>();
            stage.patch_size = item.at("patch").get<int>();
            stage.dim = item.at("dim").get<int>();
            backbone.stages.push_back(stage);
        }
    }
    return backbone;
}

// Default family mirrors the 96/192/384 stage dims; using the last one or
// two stages reproduces the 384- and 192-wide common spaces.
BackboneConfig default_backbone() {
    BackboneConfig backbone;
    backbone.stages = {{2, 2, 96}, {3, 4, 192}, {4, 7, 384}};
    return backbone;
}

nlohmann::json config_to_json(const PipelineConfig& config) {
    nlohmann::json doc;
    doc["train_manifest"] = config.train_manifest.generic_string();
    doc["val_manifest"] = config.val_manifest.generic_string();
    doc["test_manifest"] = config.test_manifest.generic_string();
    doc["stages"] = config.stages;
    doc["bins"] = config.bins;
    doc["sample_cap"] = config.sample_cap;
    doc["backbone"] = backbone_to_json(config.backbone);
    doc["gmm"] = {{"components", config.gmm_components},
                  {"seed", config.gmm_opts.seed},
                  {"reg_scale", config.gmm_opts.reg_scale},
                  {"max_iters", config.gmm_opts.max_iters},
                  {"rel_tol", config.gmm_opts.rel_tol}};
    doc["fv"] = {{"alpha", config.fv_alpha}};
    doc["classifier"] = {{"lr", config.classifier.lr},
                         {"epochs", config.classifier.epochs},
                         {"decay_epochs", config.classifier.decay_epochs},
                         {"decay_factor", config.classifier.decay_factor},
                         {"batch_size", config.classifier.batch_size},
                         {"seed", config.classifier.seed},
                         {"early_stop_patience", config.classifier.early_stop_patience},
                         {"hidden", config.classifier.hidden}};
    doc["metrics"] = {{"tie_policy", to_string(config.tie_policy)}};
    doc["kl"] = {{"samples", config.kl_samples}, {"seed", config.kl_seed}};
    return doc;
}

}  // namespace

PipelineConfig pipeline_config_from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingPath("cannot open config " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }

    PipelineConfig config;
    config.backbone = default_backbone();
    const std::filesystem::path base =
        path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    const auto resolve = [&](const std::string& p) {
        const std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };
    try {
        config.train_manifest = resolve(doc.at("train_manifest").get<std::string>());
        config.val_manifest = resolve(doc.at("val_manifest").get<std::string>());
        config.test_manifest = resolve(doc.at("test_manifest").get<std::string>());
        if (doc.contains("out_dir")) config.out_dir = resolve(doc["out_dir"].get<std::string>());
        config.stages = doc.value("stages", config.stages);
        config.bins = doc.value("bins", config.bins);
        config.sample_cap = doc.value("sample_cap", config.sample_cap);
        if (doc.contains("backbone")) config.backbone = backbone_from_json(doc["backbone"]);
        if (doc.contains("gmm")) {
            const auto& g = doc["gmm"];
            config.gmm_components = g.value("components", config.gmm_components);
            config.gmm_opts.seed = g.value("seed", config.gmm_opts.seed);
            config.gmm_opts.reg_scale = g.value("reg_scale", config.gmm_opts.reg_scale);
            config.gmm_opts.max_iters = g.value("max_iters", config.gmm_opts.max_iters);
            config.gmm_opts.rel_tol = g.value("rel_tol", config.gmm_opts.rel_tol);
        }
        if (doc.contains("fv")) config.fv_alpha = doc["fv"].value("alpha", config.fv_alpha);
        if (doc.contains("classifier")) {
            const auto& c = doc["classifier"];
            config.classifier.lr = c.value("lr", config.classifier.lr);
            config.classifier.epochs = c.value("epochs", config.classifier.epochs);
            config.classifier.decay_epochs =
                c.value("decay_epochs", config.classifier.decay_epochs);
            config.classifier.decay_factor = c.value("decay_factor", config.classifier.decay_factor);
            config.classifier.batch_size = c.value("batch_size", config.classifier.batch_size);
            config.classifier.seed = c.value("seed", config.classifier.seed);
            config.classifier.early_stop_patience =
                c.value("early_stop_patience", config.classifier.early_stop_patience);
            config.classifier.hidden = c.value("hidden", config.classifier.hidden);
        }
        if (doc.contains("metrics"))
            config.tie_policy =
                tie_policy_from_string(doc["metrics"].value("tie_policy", "half"));
        if (doc.contains("kl")) {
            config.kl_samples = doc["kl"].value("samples", config.kl_samples);
            config.kl_seed = doc["kl"].value("seed", config.kl_seed);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config has a bad field: " + std::string(e.what()));
    }
    return config;
}

void validate_pipeline_config(const PipelineConfig& config) {
    if (config.stages < 1 || config.stages > static_cast<int>(config.backbone.stages.size()))
        throw ConfigError("stages must be in [1, " +
                          std::to_string(config.backbone.stages.size()) + "]");
    if (config.sample_cap < config.gmm_components)
        throw ConfigError("sample cap " + std::to_string(config.sample_cap) +
                          " is smaller than the GMM component count " +
                          std::to_string(config.gmm_components));
    if (config.bins < 1) throw ConfigError("bins must be >= 1");
    if (config.fv_alpha <= 0.0) throw ConfigError("fv alpha must be positive");
    if (config.out_dir.empty()) throw ConfigError("out_dir is required");
    for (const auto& p : {config.train_manifest, config.val_manifest, config.test_manifest})
        if (!std::filesystem::exists(p)) throw MissingPath("manifest " + p.string());
}

std::vector<StageSpec> selected_stages(const PipelineConfig& config) {
    const auto& family = config.backbone.stages;
    const std::size_t n = static_cast<std::size_t>(config.stages);
    return {family.end() - static_cast<std::ptrdiff_t>(n), family.end()};
}

std::string config_hash(const PipelineConfig& config) {
    // nlohmann::json orders keys lexicographically, so dump() is canonical
    const std::string bytes = config_to_json(config).dump();
    std::uint64_t hash = 0xCBF29CE484222325ULL;  // FNV-1a 64
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001B3ULL;
    }
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
    return std::string(buffer, 16);
}

namespace {

// Per-stage record of every path the pipeline read.
class RunLog {
  public:
    void set_stage(const std::string& name) { stage_ = name; }
    void record(const std::filesystem::path& path) {
        std::lock_guard<std::mutex> lock(mutex_);
        reads_.emplace_back(stage_, path.generic_string());
    }
    const std::vector<std::pair<std::string, std::string>>& reads() const { return reads_; }

  private:
    std::string stage_;
    std::vector<std::pair<std::string, std::string>> reads_;
    std::mutex mutex_;
};

struct StageArtifacts {
    std::filesystem::path manifest;  // augmented with feature paths
};

std::string short_hash(const std::string& hash) { return hash.substr(0, 8); }

// extract: one tensor per (sample, selected stage) plus an augmented manifest.
StageArtifacts extract_split(const PipelineConfig& config, const std::string& hash,
                             const DatasetManifest& manifest, const std::string& split,
                             RunLog& log) {
    const std::string tag = split + "_" + short_hash(hash);
    const std::filesystem::path feature_dir = config.out_dir / ("features_" + tag);
    StageArtifacts artifacts;
    artifacts.manifest = config.out_dir / ("manifest_" + tag + ".json");
    if (std::filesystem::exists(artifacts.manifest)) return artifacts;  // cached

    std::filesystem::create_directories(feature_dir);
    BackboneConfig backbone = config.backbone;
    backbone.stages = selected_stages(config);

    DatasetManifest augmented = manifest;
    augmented.base_dir = config.out_dir;
    std::vector<std::string> errors(manifest.samples.size());
    parallel_for(manifest.samples.size(), config.threads, [&](std::size_t i) {
        const Sample& sample = manifest.samples[i];
        try {
            if (!sample.image_path)
                throw MissingPath("sample '" + sample.id + "' has no image path");
            const auto image_path = manifest.resolve(*sample.image_path);
            // the augmented manifest lives in out_dir, so image paths must
            // survive the move
            augmented.samples[i].image_path = image_path;
            log.record(image_path);
            const GrayImage image = load_image(image_path);
            const auto features = extract_stages(image, backbone);
            auto& out_sample = augmented.samples[i];
            out_sample.stage_feature_paths.clear();
            for (const StageFeatures& stage : features) {
                const std::string name =
                    sample.id + "_s" + std::to_string(stage.stage_index) + ".fvt";
                write_matrix(feature_dir / name, stage.tokens);
                out_sample.stage_feature_paths.push_back(
                    std::filesystem::path("features_" + tag) / name);
            }
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (const std::string& e : errors)
        if (!e.empty()) throw Error(e);

    save_manifest(augmented, artifacts.manifest);
    return artifacts;
}

std::vector<StageFeatures> load_sample_features(const DatasetManifest& manifest,
                                                const Sample& sample, RunLog* log) {
    std::vector<StageFeatures> features;
    int index = 1;
    for (const auto& rel : sample.stage_feature_paths) {
        const auto path = manifest.resolve(rel);
        if (log) log->record(path);
        StageFeatures stage;
        stage.stage_index = index++;
        stage.tokens = read_matrix(path);
        features.push_back(std::move(stage));
    }
    return features;
}

Matrix merge_sample(const DatasetManifest& manifest, const Sample& sample, RunLog* log) {
    const auto features = load_sample_features(manifest, sample, log);
    if (features.empty())
        throw MissingPath("sample '" + sample.id + "' has no stage features");
    std::vector<int> dims;
    for (const auto& stage : features) dims.push_back(static_cast<int>(stage.tokens.cols()));
    return merge(features, make_plan(dims));
}

Matrix encode_split(const PipelineConfig& config, const DatasetManifest& manifest,
                    const DiagGmm& gmm, RunLog& log) {
    const Index width = static_cast<Index>(
        fv_length(static_cast<int>(gmm.components()), static_cast<int>(gmm.dim())));
    Matrix encoded(static_cast<Index>(manifest.samples.size()), width);
    std::vector<std::string> errors(manifest.samples.size());
    parallel_for(manifest.samples.size(), config.threads, [&](std::size_t i) {
        try {
            const Matrix merged = merge_sample(manifest, manifest.samples[i], &log);
            const FisherVector fv = normalize(encode(gmm, merged), config.fv_alpha);
            encoded.row(static_cast<Index>(i)) = fv.values.transpose();
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (const std::string& e : errors)
        if (!e.empty()) throw Error(e);
    return encoded;
}

std::vector<std::vector<int>> labels_of(const DatasetManifest& manifest) {
    std::vector<std::vector<int>> labels;
    labels.reserve(manifest.samples.size());
    for (const Sample& sample : manifest.samples) labels.push_back(sample.labels);
    return labels;
}

template <typename Fn>
auto run_stage(RunLog& log, const std::string& name, Fn&& fn) {
    log.set_stage(name);
    try {
        return fn();
    } catch (const std::exception& e) {
        throw Error("stage " + name + ": " + e.what());
    }
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
    validate_pipeline_config(config);
    const std::string hash = config_hash(config);
    const std::string tag = short_hash(hash);
    std::filesystem::create_directories(config.out_dir);
    RunLog log;

    // train/val manifests load up front; the test manifest stays untouched
    // until the eval stage.
    log.set_stage("load");
    log.record(config.train_manifest);
    log.record(config.val_manifest);
    const DatasetManifest train_manifest = load_manifest(config.train_manifest);
    const DatasetManifest val_manifest = load_manifest(config.val_manifest);

    const StageArtifacts train_extract = run_stage(log, "extract", [&] {
        const auto train = extract_split(config, hash, train_manifest, "train", log);
        extract_split(config, hash, val_manifest, "val", log);
        return train;
    });
    const std::filesystem::path val_manifest_path =
        config.out_dir / ("manifest_val_" + tag + ".json");

    const std::filesystem::path ranking_path = config.out_dir / ("ranking_" + tag + ".json");
    run_stage(log, "rank", [&] {
        if (std::filesystem::exists(ranking_path)) return 0;
        const ImageLoader loader = [&](const std::filesystem::path& p) {
            log.record(p);
            return load_image(p);
        };
        const EntropyRanking ranking =
            rank_and_select(train_manifest, config.bins,
                            static_cast<std::size_t>(config.sample_cap), loader, config.threads);
        save_ranking(ranking, ranking_path);
        return 0;
    });

    const std::filesystem::path gmm_path = config.out_dir / ("gmm_" + tag + ".json");
    run_stage(log, "gmm-fit", [&] {
        if (std::filesystem::exists(gmm_path)) return 0;
        log.record(ranking_path);
        const EntropyRanking ranking = load_ranking(ranking_path);
        log.record(train_extract.manifest);
        const DatasetManifest augmented = load_manifest(train_extract.manifest);
        std::unordered_map<std::string, std::size_t> by_id;
        for (std::size_t i = 0; i < augmented.samples.size(); ++i)
            by_id[augmented.samples[i].id] = i;

        std::vector<Matrix> merged;
        Index total = 0;
        for (const auto& entry : ranking.entries) {
            const auto it = by_id.find(entry.sample_id);
            if (it == by_id.end())
                throw MissingPath("ranked sample '" + entry.sample_id + "' not in manifest");
            merged.push_back(merge_sample(augmented, augmented.samples[it->second], &log));
            total += merged.back().rows();
        }
        Matrix pooled(total, merged.front().cols());
        Index row = 0;
        for (const Matrix& m : merged) {
            pooled.middleRows(row, m.rows()) = m;
            row += m.rows();
        }

        EmOptions opts = config.gmm_opts;
        opts.threads = config.threads;
        const EmResult fit = fit_em(pooled, config.gmm_components, opts);
        save_gmm(fit.model, {opts.seed, fit.loglik_trace}, gmm_path);
        return 0;
    });
    log.record(gmm_path);
    const DiagGmm gmm = load_gmm(gmm_path);

    const std::filesystem::path train_fv_path = config.out_dir / ("fv_train_" + tag + ".fvt");
    const std::filesystem::path val_fv_path = config.out_dir / ("fv_val_" + tag + ".fvt");
    run_stage(log, "encode", [&] {
        if (std::filesystem::exists(train_fv_path) && std::filesystem::exists(val_fv_path))
            return 0;
        log.record(train_extract.manifest);
        log.record(val_manifest_path);
        const DatasetManifest train_aug = load_manifest(train_extract.manifest);
        const DatasetManifest val_aug = load_manifest(val_manifest_path);
        write_matrix(train_fv_path, encode_split(config, train_aug, gmm, log));
        write_matrix(val_fv_path, encode_split(config, val_aug, gmm, log));
        return 0;
    });

    const std::filesystem::path model_path = config.out_dir / ("model_" + tag + ".json");
    const std::filesystem::path train_log_path =
        config.out_dir / ("train_log_" + tag + ".jsonl");
    run_stage(log, "train", [&] {
        if (std::filesystem::exists(model_path)) return 0;
        log.record(train_fv_path);
        log.record(val_fv_path);
        const Matrix train_fv = read_matrix(train_fv_path);
        const Matrix val_fv = read_matrix(val_fv_path);
        const TrainResult result =
            train(train_fv, labels_of(train_manifest), val_fv, labels_of(val_manifest),
                  train_manifest.task, head_outputs(train_manifest.task, train_manifest.num_labels),
                  config.classifier);
        save_head(result.params, {train_manifest.task, config.classifier.seed, result.best_epoch},
                  model_path);
        save_train_log(result.log, train_log_path);
        return 0;
    });

    const std::filesystem::path report_path = config.out_dir / ("report_" + tag + ".json");
    PipelineResult result;
    result.hash = hash;
    result.report_path = report_path;
    std::set<std::string> test_paths;
    run_stage(log, "eval", [&] {
        log.record(config.test_manifest);
        const DatasetManifest test_manifest = load_manifest(config.test_manifest);
        test_paths.insert(config.test_manifest.generic_string());
        for (const Sample& sample : test_manifest.samples)
            if (sample.image_path)
                test_paths.insert(test_manifest.resolve(*sample.image_path).generic_string());

        const StageArtifacts test_extract =
            extract_split(config, hash, test_manifest, "test", log);
        log.record(test_extract.manifest);
        const DatasetManifest test_aug = load_manifest(test_extract.manifest);
        const Matrix test_fv = encode_split(config, test_aug, gmm, log);

        log.record(model_path);
        HeadMetadata meta;
        const HeadParams params = load_head(model_path, &meta);
        const Matrix logits = forward(params, test_fv);
        result.report = evaluate(logits, labels_of(test_manifest), test_manifest.task,
                                 test_manifest.num_labels, config.tie_policy);
        if (!std::filesystem::exists(report_path))
            save_report(result.report, report_path, hash);
        return 0;
    });

    // Access accounting: verify nothing belonging to the test split was read
    // before the eval stage, and persist the per-stage read list.
    result.run_log_path = config.out_dir / ("run_log_" + tag + ".json");
    {
        bool leaked = false;
        nlohmann::ordered_json stages = nlohmann::ordered_json::array();
        for (const auto& [stage, path] : log.reads()) {
            if (stage != "eval" && test_paths.count(path) > 0) leaked = true;
            stages.push_back({{"stage", stage}, {"path", path}});
        }
        nlohmann::ordered_json doc;
        doc["config_hash"] = hash;
        doc["test_paths_before_eval"] = leaked;
        doc["reads"] = std::move(stages);
        std::ofstream out(result.run_log_path, std::ios::trunc);
        out << doc.dump(2) << "\n";
    }
    return result;
}

std::vector<StudyRow> run_subsample_study_grouped(
    const Matrix& features, const std::vector<Index>& group_offsets, int components,
    const EmOptions& base_opts, const std::vector<double>& ratios,
    const std::vector<std::uint64_t>& seeds, std::size_t mc_samples, std::uint64_t mc_seed,
    int threads) {
    if (ratios.empty()) throw ConfigError("ratio list is empty");
    for (double r : ratios)
        if (!(r > 0.0) || r > 1.0) throw ConfigError("ratios must lie in (0, 1]");
    if (seeds.size() < 2) throw ConfigError("need at least two seeds");
    if (group_offsets.empty() || group_offsets.front() != 0 ||
        group_offsets.back() != features.rows())
        throw ConfigError("group offsets must start at 0 and end at the row count");

    EmOptions opts = base_opts;
    opts.threads = threads;
    const EmResult base = fit_em(features, components, opts);
    const std::size_t groups = group_offsets.size() - 1;

    std::vector<StudyRow> rows(ratios.size() * seeds.size());
    parallel_for(rows.size(), threads, [&](std::size_t cell) {
        const double ratio = ratios[cell / seeds.size()];
        const std::uint64_t seed = seeds[cell % seeds.size()];
        const auto keep_groups = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(ratio * static_cast<double>(groups))));
        const Index keep_rows = group_offsets[std::min(keep_groups, groups)];

        EmOptions cell_opts = base_opts;
        cell_opts.seed = seed;
        const EmResult fit = fit_em(features.topRows(keep_rows), components, cell_opts);
        const KlEstimate estimate =
            kl_mc(base.model, fit.model, mc_samples, derive_seed(mc_seed, cell));
        rows[cell] = {ratio, seed, estimate.value, estimate.std_error};
    });
    return rows;
}

std::vector<StudyRow> run_subsample_study_features(const Matrix& features, int components,
                                                   const EmOptions& base_opts,
                                                   const std::vector<double>& ratios,
                                                   const std::vector<std::uint64_t>& seeds,
                                                   std::size_t mc_samples,
                                                   std::uint64_t mc_seed, int threads) {
    std::vector<Index> offsets(static_cast<std::size_t>(features.rows()) + 1);
    for (std::size_t i = 0; i < offsets.size(); ++i) offsets[i] = static_cast<Index>(i);
    return run_subsample_study_grouped(features, offsets, components, base_opts, ratios, seeds,
                                       mc_samples, mc_seed, threads);
}

std::vector<StudyRow> run_subsample_study(const PipelineConfig& config,
                                          const std::vector<double>& ratios,
                                          const std::vector<std::uint64_t>& seeds) {
    validate_pipeline_config(config);
    const std::string hash = config_hash(config);
    RunLog log;
    log.set_stage("study");

    const DatasetManifest train_manifest = load_manifest(config.train_manifest);
    const StageArtifacts artifacts =
        extract_split(config, hash, train_manifest, "train", log);
    const DatasetManifest augmented = load_manifest(artifacts.manifest);

    // rank the full training set; ratios cut prefixes of the ranking
    const EntropyRanking ranking =
        rank_and_select(train_manifest, config.bins, train_manifest.samples.size(), {},
                        config.threads);
    std::unordered_map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < augmented.samples.size(); ++i)
        by_id[augmented.samples[i].id] = i;

    std::vector<Matrix> merged;
    std::vector<Index> offsets{0};
    for (const auto& entry : ranking.entries) {
        merged.push_back(merge_sample(augmented, augmented.samples[by_id.at(entry.sample_id)],
                                      nullptr));
        offsets.push_back(offsets.back() + merged.back().rows());
    }
    Matrix pooled(offsets.back(), merged.front().cols());
    for (std::size_t i = 0; i < merged.size(); ++i)
        pooled.middleRows(offsets[i], merged[i].rows()) = merged[i];

    return run_subsample_study_grouped(pooled, offsets, config.gmm_components, config.gmm_opts,
                                       ratios, seeds, config.kl_samples, config.kl_seed,
                                       config.threads);
}

void save_study(const std::vector<StudyRow>& rows, const std::filesystem::path& json_path,
                const std::filesystem::path& csv_path) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const StudyRow& row : rows)
        doc.push_back({{"ratio", row.ratio},
                       {"seed", row.seed},
                       {"kl", row.kl},
                       {"std_error", row.std_error}});
    std::ofstream json_out(json_path, std::ios::trunc);
    if (!json_out) throw MissingPath("cannot open " + json_path.string() + " for writing");
    json_out << doc.dump(2) << "\n";

    std::ofstream csv_out(csv_path, std::ios::trunc);
    if (!csv_out) throw MissingPath("cannot open " + csv_path.string() + " for writing");
    csv_out << "ratio,seed,kl,std_error\n";
    csv_out.precision(17);
    for (const StudyRow& row : rows)
        csv_out << row.ratio << "," << row.seed << "," << row.kl << "," << row.std_error << "\n";
}

}  // namespace fvenc
