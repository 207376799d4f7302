// fvpipe: batch CLI around the encoding library. Subcommands cover each
// pipeline stage plus the end-to-end run and the subsampling study.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fvenc/backbone.hpp"
#include "fvenc/classifier.hpp"
#include "fvenc/entropy.hpp"
#include "fvenc/errors.hpp"
#include "fvenc/fisher.hpp"
#include "fvenc/gmm.hpp"
#include "fvenc/kl.hpp"
#include "fvenc/metrics.hpp"
#include "fvenc/parallel.hpp"
#include "fvenc/pipeline.hpp"
#include "fvenc/rng.hpp"
#include "fvenc/stagecat.hpp"
#include "fvenc/synth.hpp"
#include "fvenc/tensor_io.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct GlobalOpts {
    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::optional<std::string> out_dir;
};

fvenc::PipelineConfig load_pipeline_config(const std::string& path, const GlobalOpts& global) {
    fvenc::PipelineConfig config = fvenc::pipeline_config_from_json_file(path);
    config.threads = global.threads;
    if (global.out_dir) config.out_dir = *global.out_dir;
    if (global.seed) {
        config.backbone.seed = *global.seed;
        config.gmm_opts.seed = fvenc::derive_seed(*global.seed, 1);
        config.classifier.seed = fvenc::derive_seed(*global.seed, 2);
        config.kl_seed = fvenc::derive_seed(*global.seed, 3);
    }
    return config;
}

fvenc::BackboneConfig load_backbone_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw fvenc::MissingPath("cannot open backbone config " + path);
    nlohmann::json doc;
    in >> doc;
    fvenc::BackboneConfig config;
    const std::string kind = doc.value("kind", "relu_linear");
    config.kind = kind == "softmax" ? fvenc::AttentionKind::softmax
                                    : fvenc::AttentionKind::relu_linear;
    config.seed = doc.value("seed", std::uint64_t{0});
    config.eps = doc.value("eps", 1e-8);
    for (const auto& item : doc.at("stages")) {
        fvenc::StageSpec stage;
        stage.stage_index = item.at("stage").get<int>();
        stage.patch_size = item.at("patch").get<int>();
        stage.dim = item.at("dim").get<int>();
        config.stages.push_back(stage);
    }
    return config;
}

fvenc::TrainConfig load_train_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw fvenc::MissingPath("cannot open train config " + path);
    nlohmann::json doc;
    in >> doc;
    fvenc::TrainConfig cfg;
    cfg.lr = doc.value("lr", cfg.lr);
    cfg.epochs = doc.value("epochs", cfg.epochs);
    cfg.decay_epochs = doc.value("decay_epochs", cfg.decay_epochs);
    cfg.decay_factor = doc.value("decay_factor", cfg.decay_factor);
    cfg.batch_size = doc.value("batch_size", cfg.batch_size);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.early_stop_patience = doc.value("early_stop_patience", cfg.early_stop_patience);
    cfg.hidden = doc.value("hidden", cfg.hidden);
    return cfg;
}

std::vector<std::vector<int>> manifest_labels(const fvenc::DatasetManifest& manifest) {
    std::vector<std::vector<int>> labels;
    for (const auto& sample : manifest.samples) labels.push_back(sample.labels);
    return labels;
}

int run_extract(const std::string& manifest_path, const std::string& config_path,
                const std::string& out_dir, int threads) {
    const fvenc::DatasetManifest manifest = fvenc::load_manifest(manifest_path);
    const fvenc::BackboneConfig config = load_backbone_config(config_path);
    fs::create_directories(out_dir);

    fvenc::DatasetManifest augmented = manifest;
    augmented.base_dir = out_dir;
    std::vector<std::string> errors(manifest.samples.size());
    fvenc::parallel_for(manifest.samples.size(), threads, [&](std::size_t i) {
        const fvenc::Sample& sample = manifest.samples[i];
        try {
            if (!sample.image_path)
                throw fvenc::MissingPath("sample '" + sample.id + "' has no image path");
            const fvenc::GrayImage image =
                fvenc::load_image(manifest.resolve(*sample.image_path));
            const auto features = fvenc::extract_stages(image, config);
            augmented.samples[i].stage_feature_paths.clear();
            for (const auto& stage : features) {
                const std::string name =
                    sample.id + "_s" + std::to_string(stage.stage_index) + ".fvt";
                fvenc::write_matrix(fs::path(out_dir) / name, stage.tokens);
                augmented.samples[i].stage_feature_paths.emplace_back(name);
            }
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (const auto& e : errors)
        if (!e.empty()) throw fvenc::Error(e);

    fvenc::save_manifest(augmented, fs::path(out_dir) / "manifest.json");
    std::cout << "extracted " << manifest.samples.size() << " samples to " << out_dir << "\n";
    return 0;
}

fvenc::Matrix pooled_features(const fvenc::DatasetManifest& manifest,
                              const std::vector<std::string>& ids) {
    std::unordered_map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < manifest.samples.size(); ++i)
        by_id[manifest.samples[i].id] = i;

    std::vector<fvenc::Matrix> merged;
    fvenc::Index total = 0;
    for (const std::string& id : ids) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw fvenc::MissingPath("sample '" + id + "' not in manifest");
        const fvenc::Sample& sample = manifest.samples[it->second];
        std::vector<fvenc::StageFeatures> features;
        int index = 1;
        for (const auto& rel : sample.stage_feature_paths) {
            fvenc::StageFeatures stage;
            stage.stage_index = index++;
            stage.tokens = fvenc::read_matrix(manifest.resolve(rel));
            features.push_back(std::move(stage));
        }
        if (features.empty())
            throw fvenc::MissingPath("sample '" + id + "' has no stage features");
        std::vector<int> dims;
        for (const auto& stage : features) dims.push_back(static_cast<int>(stage.tokens.cols()));
        merged.push_back(fvenc::merge(features, fvenc::make_plan(dims)));
        total += merged.back().rows();
    }
    fvenc::Matrix pooled(total, merged.front().cols());
    fvenc::Index row = 0;
    for (const auto& m : merged) {
        pooled.middleRows(row, m.rows()) = m;
        row += m.rows();
    }
    return pooled;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Orderless Fisher Vector encoding pipeline"};
    app.require_subcommand(1);
    GlobalOpts global;
    app.add_option("--seed", global.seed, "Override every module seed");
    app.add_option("--threads", global.threads, "Worker threads for per-sample stages");
    app.add_option("--out-dir", global.out_dir, "Override the configured output directory");

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic blob-image dataset");
    std::string synth_spec, synth_out;
    synth->add_option("--spec", synth_spec, "Spec JSON")->required();
    synth->add_option("--out-dir", synth_out, "Output directory")->required();

    // extract
    auto* extract = app.add_subcommand("extract", "Extract stage features for a manifest");
    std::string ex_manifest, ex_config, ex_out;
    extract->add_option("--manifest", ex_manifest)->required();
    extract->add_option("--config", ex_config, "Backbone config JSON")->required();
    extract->add_option("--out-dir", ex_out)->required();

    // rank
    auto* rank = app.add_subcommand("rank", "Entropy-rank manifest images");
    std::string rank_manifest, rank_out;
    int rank_bins = 256;
    std::size_t rank_cap = 5000;
    rank->add_option("--manifest", rank_manifest)->required();
    rank->add_option("--bins", rank_bins, "Histogram bins");
    rank->add_option("--cap", rank_cap, "Keep at most this many samples");
    rank->add_option("--out", rank_out)->required();

    // gmm-fit
    auto* gmm_fit = app.add_subcommand("gmm-fit", "Fit a diagonal GMM on pooled local features");
    std::string gf_features, gf_manifest, gf_ranking, gf_out;
    int gf_components = 16, gf_max_iters = 100;
    std::size_t gf_cap = 5000;
    double gf_reg_scale = 1e-4, gf_rel_tol = 1e-6;
    std::uint64_t gf_seed = 0;
    gmm_fit->add_option("--features", gf_features, "Pooled T x d tensor (direct mode)");
    gmm_fit->add_option("--manifest", gf_manifest, "Augmented manifest (pool mode)");
    gmm_fit->add_option("--ranking", gf_ranking, "Ranking JSON restricting pool mode");
    gmm_fit->add_option("--cap", gf_cap, "Sample cap applied to the ranking");
    gmm_fit->add_option("--components", gf_components);
    gmm_fit->add_option("--seed", gf_seed);
    gmm_fit->add_option("--reg-scale", gf_reg_scale);
    gmm_fit->add_option("--max-iters", gf_max_iters);
    gmm_fit->add_option("--rel-tol", gf_rel_tol);
    gmm_fit->add_option("--out", gf_out, "Model JSON path")->required();

    // encode
    auto* encode_cmd = app.add_subcommand("encode", "Fisher-encode every manifest sample");
    std::string en_gmm, en_manifest, en_out;
    double en_alpha = 0.5;
    encode_cmd->add_option("--gmm", en_gmm)->required();
    encode_cmd->add_option("--manifest", en_manifest, "Augmented manifest")->required();
    encode_cmd->add_option("--alpha", en_alpha, "Power-normalization exponent");
    encode_cmd->add_option("--out", en_out, "Output tensor, one row per sample")->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "Train the classifier head");
    std::string tr_features, tr_manifest, tr_val_features, tr_val_manifest, tr_config, tr_out,
        tr_log;
    train_cmd->add_option("--features", tr_features)->required();
    train_cmd->add_option("--manifest", tr_manifest)->required();
    train_cmd->add_option("--val-features", tr_val_features)->required();
    train_cmd->add_option("--val-manifest", tr_val_manifest)->required();
    train_cmd->add_option("--config", tr_config, "Train config JSON");
    train_cmd->add_option("--out", tr_out, "Model JSON path")->required();
    train_cmd->add_option("--log", tr_log, "Training log (JSON lines)");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a trained head");
    std::string ev_model, ev_features, ev_manifest, ev_out, ev_tie = "half";
    eval_cmd->add_option("--model", ev_model)->required();
    eval_cmd->add_option("--features", ev_features)->required();
    eval_cmd->add_option("--manifest", ev_manifest)->required();
    eval_cmd->add_option("--tie-policy", ev_tie, "half | paper");
    eval_cmd->add_option("--out", ev_out)->required();

    // kl
    auto* kl_cmd = app.add_subcommand("kl", "Monte-Carlo KL divergence between two GMMs");
    std::string kl_f, kl_g, kl_out;
    std::size_t kl_n = 1000000;
    std::uint64_t kl_seed = 0;
    kl_cmd->add_option("--gmm-f", kl_f)->required();
    kl_cmd->add_option("--gmm-g", kl_g)->required();
    kl_cmd->add_option("--samples", kl_n);
    kl_cmd->add_option("--seed", kl_seed);
    kl_cmd->add_option("--out", kl_out, "Also write the JSON here");

    // study
    auto* study_cmd = app.add_subcommand("study", "Subsampling robustness study");
    std::string st_config, st_features, st_out = "study";
    std::vector<double> st_ratios;
    std::vector<std::uint64_t> st_seeds;
    int st_components = 16;
    std::size_t st_mc = 1000000;
    std::uint64_t st_seed = 0;
    study_cmd->add_option("--config", st_config, "Pipeline config (manifest mode)");
    study_cmd->add_option("--features", st_features, "Feature tensor (direct mode)");
    study_cmd->add_option("--ratios", st_ratios, "Subset ratios in (0,1]")->required();
    study_cmd->add_option("--seeds", st_seeds, "Fit seeds, two or more")->required();
    study_cmd->add_option("--components", st_components, "Direct mode component count");
    study_cmd->add_option("--mc-samples", st_mc);
    study_cmd->add_option("--mc-seed", st_seed);
    study_cmd->add_option("--out-prefix", st_out, "Writes <prefix>.json and <prefix>.csv");

    // pipeline
    auto* pipeline_cmd = app.add_subcommand("pipeline", "Run extract/rank/fit/encode/train/eval");
    std::string pl_config;
    pipeline_cmd->add_option("--config", pl_config)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            const fvenc::BlobSpec spec = fvenc::blob_spec_from_json_file(synth_spec);
            const fvenc::BlobDataset dataset = fvenc::gen_blob_images(spec, synth_out);
            std::cout << "wrote " << dataset.files_written << " images and 3 manifests to "
                      << synth_out << "\n";
        } else if (*extract) {
            return run_extract(ex_manifest, ex_config, ex_out, global.threads);
        } else if (*rank) {
            const auto manifest = fvenc::load_manifest(rank_manifest);
            const auto ranking =
                fvenc::rank_and_select(manifest, rank_bins, rank_cap, {}, global.threads);
            fvenc::save_ranking(ranking, rank_out);
            std::cout << "ranked " << ranking.entries.size() << " samples\n";
        } else if (*gmm_fit) {
            fvenc::Matrix pooled;
            if (!gf_features.empty()) {
                pooled = fvenc::read_matrix(gf_features);
            } else if (!gf_manifest.empty()) {
                const auto manifest = fvenc::load_manifest(gf_manifest);
                std::vector<std::string> ids;
                if (!gf_ranking.empty()) {
                    const auto ranking = fvenc::load_ranking(gf_ranking);
                    for (std::size_t i = 0; i < ranking.entries.size() && i < gf_cap; ++i)
                        ids.push_back(ranking.entries[i].sample_id);
                } else {
                    for (const auto& sample : manifest.samples) ids.push_back(sample.id);
                    if (ids.size() > gf_cap) ids.resize(gf_cap);
                }
                pooled = pooled_features(manifest, ids);
            } else {
                throw fvenc::ConfigError("gmm-fit needs --features or --manifest");
            }
            fvenc::EmOptions opts;
            opts.seed = gf_seed;
            opts.reg_scale = gf_reg_scale;
            opts.max_iters = gf_max_iters;
            opts.rel_tol = gf_rel_tol;
            opts.threads = global.threads;
            const auto fit = fvenc::fit_em(pooled, gf_components, opts);
            fvenc::save_gmm(fit.model, {gf_seed, fit.loglik_trace}, gf_out);
            std::cout << "fit " << gf_components << " components on " << pooled.rows()
                      << " features in " << fit.iterations << " iterations\n";
        } else if (*encode_cmd) {
            const auto gmm = fvenc::load_gmm(en_gmm);
            const auto manifest = fvenc::load_manifest(en_manifest);
            const auto width = static_cast<fvenc::Index>(fvenc::fv_length(
                static_cast<int>(gmm.components()), static_cast<int>(gmm.dim())));
            fvenc::Matrix encoded(static_cast<fvenc::Index>(manifest.samples.size()), width);
            std::vector<std::string> errors(manifest.samples.size());
            fvenc::parallel_for(manifest.samples.size(), global.threads, [&](std::size_t i) {
                try {
                    const fvenc::Matrix merged =
                        pooled_features(manifest, {manifest.samples[i].id});
                    const auto fv = fvenc::normalize(fvenc::encode(gmm, merged), en_alpha);
                    encoded.row(static_cast<fvenc::Index>(i)) = fv.values.transpose();
                } catch (const std::exception& e) {
                    errors[i] = e.what();
                }
            });
            for (const auto& e : errors)
                if (!e.empty()) throw fvenc::Error(e);
            fvenc::write_matrix(en_out, encoded);
            std::cout << "encoded " << encoded.rows() << " descriptors of length " << width
                      << "\n";
        } else if (*train_cmd) {
            const auto train_manifest = fvenc::load_manifest(tr_manifest);
            const auto val_manifest = fvenc::load_manifest(tr_val_manifest);
            fvenc::TrainConfig cfg;
            if (!tr_config.empty()) cfg = load_train_config(tr_config);
            if (global.seed) cfg.seed = *global.seed;
            const auto result = fvenc::train(
                fvenc::read_matrix(tr_features), manifest_labels(train_manifest),
                fvenc::read_matrix(tr_val_features), manifest_labels(val_manifest),
                train_manifest.task,
                fvenc::head_outputs(train_manifest.task, train_manifest.num_labels), cfg);
            fvenc::save_head(result.params, {train_manifest.task, cfg.seed, result.best_epoch},
                             tr_out);
            if (!tr_log.empty()) fvenc::save_train_log(result.log, tr_log);
            std::cout << "best validation epoch " << result.best_epoch << "\n";
        } else if (*eval_cmd) {
            fvenc::HeadMetadata meta;
            const auto params = fvenc::load_head(ev_model, &meta);
            const auto manifest = fvenc::load_manifest(ev_manifest);
            const auto logits = fvenc::forward(params, fvenc::read_matrix(ev_features));
            const auto report =
                fvenc::evaluate(logits, manifest_labels(manifest), manifest.task,
                                manifest.num_labels, fvenc::tie_policy_from_string(ev_tie));
            fvenc::save_report(report, ev_out);
            std::cout << "acc " << report.acc << " auc " << report.auc << "\n";
        } else if (*kl_cmd) {
            const auto f = fvenc::load_gmm(kl_f);
            const auto g = fvenc::load_gmm(kl_g);
            const auto estimate = fvenc::kl_mc(f, g, kl_n, kl_seed, global.threads);
            ordered_json doc;
            doc["value"] = estimate.value;
            doc["std_error"] = estimate.std_error;
            doc["n"] = estimate.n_samples;
            doc["seed"] = estimate.seed;
            doc["rng"] = estimate.rng;
            std::cout << doc.dump(2) << "\n";
            if (!kl_out.empty()) {
                std::ofstream out(kl_out, std::ios::trunc);
                out << doc.dump(2) << "\n";
            }
        } else if (*study_cmd) {
            std::vector<fvenc::StudyRow> rows;
            if (!st_features.empty()) {
                fvenc::EmOptions opts;
                opts.seed = st_seeds.front();
                rows = fvenc::run_subsample_study_features(
                    fvenc::read_matrix(st_features), st_components, opts, st_ratios, st_seeds,
                    st_mc, st_seed, global.threads);
            } else if (!st_config.empty()) {
                const auto config = load_pipeline_config(st_config, global);
                rows = fvenc::run_subsample_study(config, st_ratios, st_seeds);
            } else {
                throw fvenc::ConfigError("study needs --config or --features");
            }
            fvenc::save_study(rows, st_out + ".json", st_out + ".csv");
            std::cout << "study wrote " << rows.size() << " cells to " << st_out << ".{json,csv}\n";
        } else if (*pipeline_cmd) {
            const auto config = load_pipeline_config(pl_config, global);
            const auto result = fvenc::run_pipeline(config);
            std::cout << "report " << result.report_path.string() << " acc " << result.report.acc
                      << " auc " << result.report.auc << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
