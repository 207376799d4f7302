#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fvenc/linalg.hpp"
#include "fvenc/manifest.hpp"

namespace fvenc {

// Two fully connected layers with layer normalization on the first, GELU
// (tanh form) in between. Only these weights train; the feature extractor
// stays frozen.
struct HeadParams {
    Matrix w1;       // fv_len x hidden
    Vector b1;       // hidden
    Vector ln_gain;  // hidden
    Vector ln_bias;  // hidden
    Matrix w2;       // hidden x outputs
    Vector b2;       // outputs

    Index input_dim() const { return w1.rows(); }
    Index hidden_dim() const { return w1.cols(); }
    Index output_dim() const { return w2.cols(); }
};

struct TrainConfig {
    double lr = 1e-4;
    int epochs = 20;
    std::vector<int> decay_epochs = {10, 15};
    double decay_factor = 0.1;
    int batch_size = 32;
    std::uint64_t seed = 0;
    int early_stop_patience = 5;
    int hidden = 512;
};

struct TrainLogEntry {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double lr = 0.0;
};

struct TrainResult {
    HeadParams params;
    std::vector<TrainLogEntry> log;
    int best_epoch = 0;
};

// Uniform fan-in init for the linear layers, gain 1 / bias 0 for layer norm.
HeadParams init_head(Index input_dim, Index hidden, Index outputs, std::uint64_t seed);

// Logits for a batch of encoded descriptors (rows).
Matrix forward(const HeadParams& params, const Matrix& batch);

// Cross-entropy on logits: softmax for binary/multiclass (binary heads have
// two logits), mean per-label sigmoid cross-entropy for multilabel. Labels
// use the manifest layout. Optionally writes d(loss)/d(logits).
double cross_entropy(const Matrix& logits, const std::vector<std::vector<int>>& labels,
                     Task task, Matrix* dlogits = nullptr);

struct HeadGradients {
    Matrix w1;
    Vector b1;
    Vector ln_gain;
    Vector ln_bias;
    Matrix w2;
    Vector b2;
};

// Mean loss over the batch plus analytic gradients for every parameter.
double loss_and_grad(const HeadParams& params, const Matrix& batch,
                     const std::vector<std::vector<int>>& labels, Task task,
                     HeadGradients& grads);

// Adam with the stated decay schedule and best-validation-epoch selection.
// Deterministic given the config seed.
TrainResult train(const Matrix& train_x, const std::vector<std::vector<int>>& train_y,
                  const Matrix& val_x, const std::vector<std::vector<int>>& val_y, Task task,
                  Index outputs, const TrainConfig& cfg);

// Output width the head needs for a task: 2 for binary (softmax pair),
// num_labels otherwise.
Index head_outputs(Task task, int num_labels);

struct HeadMetadata {
    Task task = Task::binary;
    std::uint64_t seed = 0;
    int best_epoch = 0;
};
void save_head(const HeadParams& params, const HeadMetadata& meta,
               const std::filesystem::path& json_path);
HeadParams load_head(const std::filesystem::path& json_path, HeadMetadata* meta = nullptr);

void save_train_log(const std::vector<TrainLogEntry>& log, const std::filesystem::path& path);

}  // namespace fvenc
