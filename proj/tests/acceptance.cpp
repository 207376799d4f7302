// Acceptance suite: one check per shipped criterion, one printed line each.
// Exits with the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fvenc/attention.hpp"
#include "fvenc/classifier.hpp"
#include "fvenc/entropy.hpp"
#include "fvenc/fisher.hpp"
#include "fvenc/gmm.hpp"
#include "fvenc/image.hpp"
#include "fvenc/kl.hpp"
#include "fvenc/metrics.hpp"
#include "fvenc/pipeline.hpp"
#include "fvenc/rng.hpp"
#include "fvenc/stagecat.hpp"
#include "fvenc/synth.hpp"

using namespace fvenc;

namespace {

void require(bool condition, const std::string& message) {
    if (!condition) throw std::runtime_error(message);
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

Matrix random_matrix(Index rows, Index cols, unsigned seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = dist(gen);
    return m;
}

DiagGmm random_gmm(int components, int dim, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> mean_dist(-2.0, 2.0);
    std::uniform_real_distribution<double> var_dist(0.3, 2.0);
    std::uniform_real_distribution<double> w_dist(0.2, 1.0);
    DiagGmm gmm;
    gmm.weights.resize(components);
    gmm.means.resize(components, dim);
    gmm.variances.resize(components, dim);
    gmm.reg = 1e-8;
    for (int k = 0; k < components; ++k) {
        gmm.weights(k) = w_dist(gen);
        for (int c = 0; c < dim; ++c) {
            gmm.means(k, c) = mean_dist(gen);
            gmm.variances(k, c) = var_dist(gen);
        }
    }
    gmm.weights /= gmm.weights.sum();
    return gmm;
}

// ---- independent scalar-loop oracles -------------------------------------

std::vector<double> fisher_oracle(const DiagGmm& gmm, const Matrix& features) {
    const int k = static_cast<int>(gmm.components());
    const int d = static_cast<int>(gmm.dim());
    const int t_count = static_cast<int>(features.rows());

    std::vector<std::vector<double>> gamma(t_count, std::vector<double>(k, 0.0));
    for (int t = 0; t < t_count; ++t) {
        double denom = 0.0;
        for (int j = 0; j < k; ++j) {
            double gauss = 1.0;
            for (int c = 0; c < d; ++c) {
                const double v = gmm.variances(j, c);
                const double diff = features(t, c) - gmm.means(j, c);
                gauss *= std::exp(-diff * diff / (2.0 * v)) / std::sqrt(2.0 * M_PI * v);
            }
            gamma[t][j] = gmm.weights(j) * gauss;
            denom += gamma[t][j];
        }
        for (int j = 0; j < k; ++j) gamma[t][j] /= denom;
    }

    std::vector<double> fv(static_cast<std::size_t>(k) * (2 * d + 1), 0.0);
    for (int j = 0; j < k; ++j) {
        const double w = gmm.weights(j);
        double g_w = 0.0;
        for (int t = 0; t < t_count; ++t) g_w += gamma[t][j] - w;
        fv[static_cast<std::size_t>(j)] = g_w / (t_count * std::sqrt(w));
        for (int c = 0; c < d; ++c) {
            const double sigma = std::sqrt(gmm.variances(j, c));
            double g_mu = 0.0, g_sigma = 0.0;
            for (int t = 0; t < t_count; ++t) {
                const double diff = features(t, c) - gmm.means(j, c);
                g_mu += gamma[t][j] * diff / sigma;
                g_sigma += gamma[t][j] * (diff * diff / (sigma * sigma) - 1.0);
            }
            fv[static_cast<std::size_t>(k + j * d + c)] = g_mu / (t_count * std::sqrt(w));
            fv[static_cast<std::size_t>(k + k * d + j * d + c)] =
                g_sigma / (t_count * std::sqrt(2.0 * w));
        }
    }
    return fv;
}

double auc_oracle(const std::vector<double>& scores, const std::vector<int>& labels,
                  TiePolicy policy) {
    std::uint64_t strict = 0, ties = 0, pos = 0, neg = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0) {
            ++pos;
            continue;
        }
        ++neg;
        for (std::size_t j = 0; j < labels.size(); ++j) {
            if (labels[j] == 0) continue;
            if (scores[i] < scores[j]) ++strict;
            else if (scores[i] == scores[j]) ++ties;
        }
    }
    const double denom = static_cast<double>(pos) * static_cast<double>(neg);
    if (policy == TiePolicy::paper) return static_cast<double>(strict) / denom;
    return (static_cast<double>(strict) + 0.5 * static_cast<double>(ties)) / denom;
}

std::vector<std::vector<double>> attention_oracle(const Matrix& x, const AttentionParams& p,
                                                  bool softmax, double eps) {
    const std::size_t n = static_cast<std::size_t>(x.rows());
    const std::size_t f = static_cast<std::size_t>(x.cols());
    const std::size_t d = static_cast<std::size_t>(p.w_q.cols());
    const auto project = [&](const Matrix& w) {
        std::vector<std::vector<double>> out(n, std::vector<double>(d, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j)
                for (std::size_t c = 0; c < f; ++c) out[i][j] += x(i, c) * w(c, j);
        return out;
    };
    const auto q = project(p.w_q);
    const auto k = project(p.w_k);
    const auto v = project(p.w_v);

    std::vector<std::vector<double>> sim(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        if (softmax) {
            double row_max = -1e300;
            for (std::size_t j = 0; j < n; ++j) {
                double dot = 0.0;
                for (std::size_t c = 0; c < d; ++c) dot += q[i][c] * k[j][c];
                sim[i][j] = dot / std::sqrt(static_cast<double>(d));
                row_max = std::max(row_max, sim[i][j]);
            }
            double denom = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                sim[i][j] = std::exp(sim[i][j] - row_max);
                denom += sim[i][j];
            }
            for (std::size_t j = 0; j < n; ++j) sim[i][j] /= denom;
        } else {
            double denom = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                double dot = 0.0;
                for (std::size_t c = 0; c < d; ++c)
                    dot += std::max(q[i][c], 0.0) * std::max(k[j][c], 0.0);
                sim[i][j] = dot;
                denom += dot;
            }
            for (std::size_t j = 0; j < n; ++j) sim[i][j] /= std::max(denom, eps);
        }
    }

    std::vector<std::vector<double>> out(n, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < d; ++c)
            for (std::size_t j = 0; j < n; ++j) out[i][c] += sim[i][j] * v[j][c];
    return out;
}

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// ---- criteria -------------------------------------------------------------

void criterion_fisher_oracle() {
    std::mt19937 gen(101);
    std::uniform_int_distribution<int> pick_k(1, 4), pick_d(1, 5), pick_t(1, 20);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int k = pick_k(gen), d = pick_d(gen), t = pick_t(gen);
        const DiagGmm gmm = random_gmm(k, d, 5000 + trial);
        const Matrix features = random_matrix(t, d, 9000 + trial, -2.5, 2.5);
        const FisherVector fv = encode(gmm, features);
        const auto ref = fisher_oracle(gmm, features);
        for (Index i = 0; i < fv.values.size(); ++i)
            worst = std::max(worst,
                             std::abs(fv.values(i) - ref[static_cast<std::size_t>(i)]));
    }
    require(worst < 1e-10, "max abs diff vs oracle = " + format_double(worst));
}

void criterion_fisher_identity() {
    DiagGmm gmm;
    gmm.weights = Vector::Ones(1);
    gmm.means = random_matrix(1, 4, 3, -1.0, 1.0);
    gmm.variances = Matrix::Constant(1, 4, 0.9);
    gmm.reg = 1e-8;
    Matrix features(6, 4);
    for (Index t = 0; t < 6; ++t) features.row(t) = gmm.means.row(0);
    const FisherVector fv = encode(gmm, features);
    require(std::abs(fv.values(0)) <= 1e-12, "weight gradient not 0");
    for (int c = 0; c < 4; ++c)
        require(std::abs(fv.values(1 + c)) <= 1e-12, "mean gradient not 0");
    for (int c = 0; c < 4; ++c)
        require(std::abs(fv.values(5 + c) + 1.0 / std::sqrt(2.0)) <= 1e-12,
                "variance gradient not -1/sqrt(2)");
}

void criterion_em() {
    for (unsigned seed = 0; seed < 100; ++seed) {
        const Matrix data = random_matrix(200, 3, 7000 + seed, -3.0, 3.0);
        EmOptions opts;
        opts.seed = seed;
        const EmResult fit = fit_em(data, 4, opts);
        for (std::size_t i = 1; i < fit.loglik_trace.size(); ++i)
            require(fit.loglik_trace[i] >= fit.loglik_trace[i - 1] - 1e-8,
                    "trace decreased at seed " + std::to_string(seed) + " step " +
                        std::to_string(i) + " by " +
                        format_double(fit.loglik_trace[i - 1] - fit.loglik_trace[i]));
    }

    std::mt19937 gen(55);
    std::normal_distribution<double> noise(0.0, 0.5);
    const double centers[3][2] = {{0, 0}, {10, 0}, {0, 10}};
    Matrix data(1500, 2);
    for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 500; ++i)
            for (int j = 0; j < 2; ++j) data(k * 500 + i, j) = centers[k][j] + noise(gen);
    EmOptions opts;
    opts.seed = 1;
    opts.max_iters = 100;
    const EmResult fit = fit_em(data, 3, opts);
    require(fit.iterations <= 100, "too many iterations");
    std::vector<bool> used(3, false);
    for (Index k = 0; k < 3; ++k) {
        int best = -1;
        double best_dist = 1e300;
        for (int c = 0; c < 3; ++c) {
            const double dx = fit.model.means(k, 0) - centers[c][0];
            const double dy = fit.model.means(k, 1) - centers[c][1];
            if (std::hypot(dx, dy) < best_dist) {
                best_dist = std::hypot(dx, dy);
                best = c;
            }
        }
        require(best_dist < 0.1,
                "mean error " + format_double(best_dist) + " for component " +
                    std::to_string(k));
        require(!used[best], "two components matched one center");
        used[best] = true;
    }
}

void criterion_kl() {
    const DiagGmm f0 = random_gmm(3, 2, 71);
    const KlEstimate self = kl_mc(f0, f0, 50000, 3);
    require(self.value == 0.0 && self.std_error == 0.0, "kl_mc(f,f) != 0");

    std::mt19937 gen(73);
    std::uniform_real_distribution<double> mean_dist(-2.0, 2.0);
    std::uniform_real_distribution<double> sigma_dist(0.6, 1.8);
    for (int trial = 0; trial < 100; ++trial) {
        DiagGmm f, g;
        f.weights = Vector::Ones(1);
        g.weights = Vector::Ones(1);
        f.means.resize(1, 2);
        g.means.resize(1, 2);
        f.variances.resize(1, 2);
        g.variances.resize(1, 2);
        for (int c = 0; c < 2; ++c) {
            f.means(0, c) = mean_dist(gen);
            g.means(0, c) = mean_dist(gen);
            f.variances(0, c) = std::pow(sigma_dist(gen), 2);
            g.variances(0, c) = std::pow(sigma_dist(gen), 2);
        }
        const double reference = kl_gaussian_closed(f, g);
        const KlEstimate estimate = kl_mc(f, g, 100000, 7000 + trial);
        require(std::abs(estimate.value - reference) <= 4.0 * estimate.std_error,
                "pair " + std::to_string(trial) + ": |" + format_double(estimate.value) +
                    " - " + format_double(reference) + "| > 4se=" +
                    format_double(4.0 * estimate.std_error));
    }

    DiagGmm standard, shifted;
    standard.weights = Vector::Ones(1);
    standard.means = Matrix::Zero(1, 1);
    standard.variances = Matrix::Ones(1, 1);
    shifted = standard;
    shifted.means = Matrix::Constant(1, 1, 1.0);
    const KlEstimate estimate = kl_mc(standard, shifted, 1000000, 11);
    require(std::abs(estimate.value - 0.5) <= 3.0 * estimate.std_error,
            "N(0,1)||N(1,1): " + format_double(estimate.value) + " se " +
                format_double(estimate.std_error));
}

void criterion_subsampling() {
    PlantedSpec spec;
    spec.components = 4;
    spec.dim = 6;
    spec.total = 20000;
    spec.center_range = 4.0;
    spec.min_sigma = 0.6;
    spec.max_sigma = 1.4;
    spec.seed = 2024;
    const PlantedMixture planted = gen_planted_mixture(spec);

    // Fit with fewer components than the planted truth. Capacity mismatch,
    // not sample count, then dominates the divergence to the base fit, which
    // is the regime where subsampling is expected to be harmless.
    EmOptions opts;
    opts.seed = 100;
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 100; s < 110; ++s) seeds.push_back(s);

    const auto rows = run_subsample_study_features(planted.samples, 2, opts,
                                                   {0.02, 0.1, 0.5, 1.0}, seeds, 1000000, 9);
    std::vector<double> at_01, at_05;
    bool zero_ok = false;
    for (const StudyRow& row : rows) {
        if (row.ratio == 0.1) at_01.push_back(row.kl);
        if (row.ratio == 0.5) at_05.push_back(row.kl);
        if (row.ratio == 1.0 && row.seed == opts.seed)
            zero_ok = row.kl == 0.0 && row.std_error == 0.0;
    }
    require(zero_ok, "ratio 1.0 same-seed cell is not exactly 0");
    const double med_01 = median(at_01);
    const double med_05 = median(at_05);
    require(med_01 <= 2.0 * med_05 && med_01 >= 0.5 * med_05,
            "medians not within a factor of 2: ratio 0.1 -> " + format_double(med_01) +
                ", ratio 0.5 -> " + format_double(med_05));
}

void criterion_stagecat() {
    std::mt19937 gen(81);
    std::uniform_int_distribution<int> n_stages(1, 4), base_dim(1, 6), mult(1, 4), tokens(1, 9);
    for (int trial = 0; trial < 1000; ++trial) {
        const int stages = n_stages(gen);
        const int base = base_dim(gen);
        std::vector<StageFeatures> features(stages);
        std::vector<int> dims, counts, indices;
        for (int s = 0; s < stages; ++s) {
            dims.push_back(base * mult(gen));
            counts.push_back(tokens(gen));
            indices.push_back(s + 1);
            features[s].stage_index = s + 1;
            features[s].tokens =
                random_matrix(counts[s], dims[s], static_cast<unsigned>(trial * 11 + s));
        }
        const SplitPlan plan = make_plan(dims);
        const Matrix merged = merge(features, plan);
        const auto back = unmerge(merged, plan, counts, indices);
        for (int s = 0; s < stages; ++s)
            require(std::memcmp(back[s].tokens.data(), features[s].tokens.data(),
                                sizeof(double) * back[s].tokens.size()) == 0,
                    "round-trip not bit-exact at trial " + std::to_string(trial));
    }
    require(make_plan({384, 192}).common_dim == 192, "gcd(384,192) != 192");
}

void criterion_entropy() {
    GrayImage constant;
    constant.width = 8;
    constant.height = 8;
    constant.pixels.assign(64, 0.4);
    require(image_entropy(constant, 256) == 0.0, "constant image entropy != 0");

    GrayImage two_level;
    two_level.width = 8;
    two_level.height = 8;
    two_level.pixels.assign(64, 0.0);
    for (int i = 32; i < 64; ++i) two_level.pixels[i] = 1.0;
    require(std::abs(image_entropy(two_level, 2) - std::log(2.0)) <= 1e-12,
            "balanced image entropy != log 2");

    std::mt19937 gen(91);
    std::uniform_int_distribution<int> level(0, 1023), pick_a(0, 5), pick_b(-8, 8);
    const double a_choices[6] = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
    for (int trial = 0; trial < 500; ++trial) {
        GrayImage image;
        image.width = 7;
        image.height = 7;
        image.pixels.resize(49);
        for (double& p : image.pixels) p = level(gen) / 1024.0;
        const double h = image_entropy(image, 64);

        GrayImage shuffled = image;
        std::shuffle(shuffled.pixels.begin(), shuffled.pixels.end(), gen);
        require(image_entropy(shuffled, 64) == h, "permutation changed entropy");

        GrayImage rescaled = image;
        const double a = a_choices[pick_a(gen)];
        const double b = pick_b(gen) / 8.0;
        for (double& p : rescaled.pixels) p = a * p + b;
        require(image_entropy(rescaled, 64) == h, "affine rescale changed entropy");
    }
}

void criterion_metrics() {
    std::mt19937 gen(95);
    std::uniform_int_distribution<int> n_dist(2, 50), level(0, 7), coin(0, 1);
    int done = 0;
    while (done < 1000) {
        const int n = n_dist(gen);
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        bool has_pos = false, has_neg = false;
        for (int i = 0; i < n; ++i) {
            scores[i] = level(gen) / 7.0;
            labels[i] = coin(gen);
            (labels[i] ? has_pos : has_neg) = true;
        }
        if (!has_pos || !has_neg) continue;
        ++done;
        for (TiePolicy policy : {TiePolicy::half, TiePolicy::paper})
            require(auc_binary(scores, labels, policy) == auc_oracle(scores, labels, policy),
                    "fast AUC != brute force");
        const auto curve = roc_curve(scores, labels);
        double area = 0.0;
        for (std::size_t i = 1; i < curve.size(); ++i)
            area += (curve[i].first - curve[i - 1].first) *
                    (curve[i].second + curve[i - 1].second) * 0.5;
        require(std::abs(area - auc_binary(scores, labels, TiePolicy::half)) < 1e-10,
                "trapezoid area != half-policy AUC");
    }
    require(accuracy({{1, 0}, {0, 1}}, {{1, 1}, {0, 1}}, Task::multilabel) == 0.75,
            "hand accuracy example != 0.75");
}

void criterion_classifier() {
    std::mt19937 gen(97);
    std::uniform_int_distribution<int> pick_task(0, 1), cls(0, 2), bit(0, 1);
    const double step = 1e-5;
    for (int trial = 0; trial < 100; ++trial) {
        const Task task = pick_task(gen) == 0 ? Task::multiclass : Task::multilabel;
        HeadParams p = init_head(5, 4, 3, 600 + trial);
        Rng jitter(trial);
        for (Index j = 0; j < p.b1.size(); ++j) p.b1(j) = jitter.uniform(-0.3, 0.3);
        for (Index j = 0; j < p.ln_gain.size(); ++j) p.ln_gain(j) = jitter.uniform(0.7, 1.3);

        const Matrix batch = random_matrix(4, 5, 700 + trial, -1.5, 1.5);
        std::vector<std::vector<int>> labels;
        for (int i = 0; i < 4; ++i) {
            if (task == Task::multiclass)
                labels.push_back({cls(gen)});
            else
                labels.push_back({bit(gen), bit(gen), bit(gen)});
        }
        HeadGradients grads;
        loss_and_grad(p, batch, labels, task, grads);
        double scale = 1.0;
        scale = std::max(scale, grads.w1.cwiseAbs().maxCoeff());
        scale = std::max(scale, grads.w2.cwiseAbs().maxCoeff());

        const auto probe = [&](double* value, double analytic) {
            const double saved = *value;
            *value = saved + step;
            const double up = cross_entropy(forward(p, batch), labels, task);
            *value = saved - step;
            const double down = cross_entropy(forward(p, batch), labels, task);
            *value = saved;
            const double numeric = (up - down) / (2.0 * step);
            require(std::abs(analytic - numeric) / scale < 1e-4,
                    "gradient mismatch " + format_double(analytic) + " vs " +
                        format_double(numeric));
        };
        probe(&p.w1(1, 2), grads.w1(1, 2));
        probe(&p.b1(0), grads.b1(0));
        probe(&p.ln_gain(2), grads.ln_gain(2));
        probe(&p.ln_bias(1), grads.ln_bias(1));
        probe(&p.w2(3, 1), grads.w2(3, 1));
        probe(&p.b2(2), grads.b2(2));
    }

    std::uniform_real_distribution<double> shift_dist(-40.0, 40.0);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix logits = random_matrix(5, 4, 800 + trial, -3.0, 3.0);
        std::vector<std::vector<int>> labels;
        for (int i = 0; i < 5; ++i) labels.push_back({cls(gen)});
        const double base = cross_entropy(logits, labels, Task::multiclass);
        Matrix moved = logits;
        for (Index i = 0; i < moved.rows(); ++i) moved.row(i).array() += shift_dist(gen);
        require(std::abs(cross_entropy(moved, labels, Task::multiclass) - base) <= 1e-10,
                "softmax loss not shift-invariant");
    }
}

void criterion_pipeline() {
    const auto scratch =
        std::filesystem::temp_directory_path() / ("fvenc_acceptance_" + std::to_string(::getpid()));
    std::filesystem::remove_all(scratch);
    std::filesystem::create_directories(scratch);

    BlobSpec spec;
    spec.classes = 2;
    spec.width = 28;
    spec.height = 28;
    spec.train_count = 240;
    spec.val_count = 60;
    spec.test_count = 100;
    spec.seed = 7;
    gen_blob_images(spec, scratch / "data");

    PipelineConfig config;
    config.train_manifest = scratch / "data" / "train.json";
    config.val_manifest = scratch / "data" / "val.json";
    config.test_manifest = scratch / "data" / "test.json";
    config.out_dir = scratch / "run";
    config.stages = 2;  // stage dims {192, 384}, common dim 192
    config.backbone.stages = {{2, 2, 96}, {3, 4, 192}, {4, 7, 384}};
    config.backbone.seed = 12;
    config.sample_cap = 5000;
    config.gmm_components = 16;
    config.gmm_opts.seed = 5;
    config.classifier.lr = 1e-3;
    config.classifier.hidden = 256;
    config.classifier.seed = 9;
    config.threads = 2;

    const PipelineResult run = run_pipeline(config);
    require(run.report.acc >= 0.9, "test accuracy " + format_double(run.report.acc) + " < 0.9");
    require(run.report.auc >= 0.95, "test AUC " + format_double(run.report.auc) + " < 0.95");

    PipelineConfig rerun = config;
    rerun.out_dir = scratch / "run_b";
    const PipelineResult second = run_pipeline(rerun);
    std::ifstream f1(run.report_path, std::ios::binary), f2(second.report_path, std::ios::binary);
    const std::string c1((std::istreambuf_iterator<char>(f1)), {});
    const std::string c2((std::istreambuf_iterator<char>(f2)), {});
    require(c1 == c2, "reports differ between identical seeded runs");

    std::filesystem::remove_all(scratch);
}

void criterion_attention() {
    std::mt19937 gen(99);
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = 2 + trial % 6;
        const Index f = 3 + trial % 4;
        const Matrix x = random_matrix(n, f, 1200 + trial, -1.5, 1.5);
        const AttentionParams params =
            make_attention_params(f, f, static_cast<std::uint64_t>(trial));

        const Matrix soft_sim = softmax_similarity(x, params);
        for (Index i = 0; i < n; ++i)
            require(std::abs(soft_sim.row(i).sum() - 1.0) <= 1e-9,
                    "softmax similarity row sum off");

        const double eps = 1e-8;
        const Matrix rq = (x * params.w_q).cwiseMax(0.0);
        const Matrix rk = (x * params.w_k).cwiseMax(0.0);
        const Matrix relu_sim = relu_linear_similarity(x, params, eps);
        for (Index i = 0; i < n; ++i) {
            const double denom = (rq.row(i) * rk.transpose()).sum();
            if (denom > 10.0 * eps)
                require(std::abs(relu_sim.row(i).sum() - 1.0) <= 1e-6,
                        "relu similarity row sum off");
        }

        const Matrix soft_out = softmax_attention(x, params);
        const auto soft_ref = attention_oracle(x, params, true, eps);
        const Matrix relu_out = relu_linear_attention(x, params, eps);
        const auto relu_ref = attention_oracle(x, params, false, eps);
        for (Index i = 0; i < n; ++i)
            for (Index c = 0; c < soft_out.cols(); ++c) {
                require(std::abs(soft_out(i, c) -
                                 soft_ref[static_cast<std::size_t>(i)]
                                         [static_cast<std::size_t>(c)]) <= 1e-12,
                        "softmax attention differs from oracle");
                require(std::abs(relu_out(i, c) -
                                 relu_ref[static_cast<std::size_t>(i)]
                                         [static_cast<std::size_t>(c)]) <= 1e-12,
                        "relu attention differs from oracle");
            }
    }
}

struct Criterion {
    int id;
    const char* label;
    std::function<void()> body;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "Fisher Vector oracle equivalence (1000 random instances, < 1e-10)",
         criterion_fisher_oracle},
        {2, "Fisher Vector closed-form identity at the mean", criterion_fisher_identity},
        {3, "EM monotonicity and planted-mixture recovery", criterion_em},
        {4, "KL estimator: exact zero, closed-form band, mean-shift case", criterion_kl},
        {5, "Subsampling robustness study (ratio 0.1 vs 0.5, exact zero at 1.0)",
         criterion_subsampling},
        {6, "Lossless concatenation round-trip and gcd plan", criterion_stagecat},
        {7, "Entropy: degenerate cases and invariance properties", criterion_entropy},
        {8, "Metrics: exact AUC vs brute force, ROC area, hand example", criterion_metrics},
        {9, "Classifier gradients vs finite differences, loss shift-invariance",
         criterion_classifier},
        {10, "End-to-end pipeline on synthetic blobs (acc >= 0.9, auc >= 0.95)",
         criterion_pipeline},
        {11, "Attention row sums and naive-oracle equivalence", criterion_attention},
    };

    int failures = 0;
    for (const Criterion& criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string failure;
        try {
            criterion.body();
        } catch (const std::exception& e) {
            failure = e.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::ostringstream line;
        line.precision(1);
        line << std::fixed;
        if (failure.empty()) {
            line << "[PASS] criterion " << criterion.id << ": " << criterion.label << " ("
                 << seconds << "s)";
        } else {
            line << "[FAIL] criterion " << criterion.id << ": " << criterion.label << ": "
                 << failure << " (" << seconds << "s)";
            ++failures;
        }
        std::cout << line.str() << std::endl;
    }
    return failures;
}
