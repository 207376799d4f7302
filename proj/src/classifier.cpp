#include "fvenc/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include <json.hpp>

#include "fvenc/errors.hpp"
#include "fvenc/rng.hpp"
#include "fvenc/tensor_io.hpp"

namespace fvenc {

namespace {

constexpr double kLnEps = 1e-5;
// tanh-form GELU constants
constexpr double kGeluC0 = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluC1 = 0.044715;

double gelu(double x) {
    const double u = kGeluC0 * (x + kGeluC1 * x * x * x);
    return 0.5 * x * (1.0 + std::tanh(u));
}

double gelu_derivative(double x) {
    const double u = kGeluC0 * (x + kGeluC1 * x * x * x);
    const double th = std::tanh(u);
    const double du = kGeluC0 * (1.0 + 3.0 * kGeluC1 * x * x);
    return 0.5 * (1.0 + th) + 0.5 * x * (1.0 - th * th) * du;
}

struct ForwardCache {
    Matrix pre_norm;    // n x hidden, W1^T x + b1
    Matrix normalized;  // n x hidden, after layer norm (pre gain/bias)
    Vector inv_std;     // n
    Matrix activated;   // n x hidden, after gain/bias and GELU
    Matrix pre_act;     // n x hidden, after gain/bias (GELU input)
    Matrix logits;      // n x outputs
};

ForwardCache run_forward(const HeadParams& params, const Matrix& batch) {
    if (batch.cols() != params.input_dim())
        throw ShapeMismatch("descriptor length " + std::to_string(batch.cols()) +
                            " != head input " + std::to_string(params.input_dim()));
    const Index n = batch.rows();
    const Index hidden = params.hidden_dim();

    ForwardCache cache;
    cache.pre_norm = batch * params.w1;
    cache.pre_norm.rowwise() += params.b1.transpose();

    cache.normalized.resize(n, hidden);
    cache.inv_std.resize(n);
    for (Index i = 0; i < n; ++i) {
        const double mean = cache.pre_norm.row(i).mean();
        const double var =
            (cache.pre_norm.row(i).array() - mean).square().sum() / static_cast<double>(hidden);
        cache.inv_std(i) = 1.0 / std::sqrt(var + kLnEps);
        cache.normalized.row(i) = (cache.pre_norm.row(i).array() - mean) * cache.inv_std(i);
    }

    cache.pre_act = cache.normalized.array().rowwise() * params.ln_gain.transpose().array();
    cache.pre_act.rowwise() += params.ln_bias.transpose();

    cache.activated = cache.pre_act.unaryExpr([](double x) { return gelu(x); });
    cache.logits = cache.activated * params.w2;
    cache.logits.rowwise() += params.b2.transpose();
    return cache;
}

void check_labels(const Matrix& logits, const std::vector<std::vector<int>>& labels, Task task) {
    if (static_cast<Index>(labels.size()) != logits.rows())
        throw LabelMismatch("label rows != batch rows");
    for (const auto& row : labels) {
        switch (task) {
            case Task::binary:
            case Task::multiclass:
                if (row.size() != 1 || row[0] < 0 || row[0] >= logits.cols())
                    throw LabelMismatch("class index out of range for logit width");
                break;
            case Task::multilabel:
                if (static_cast<Index>(row.size()) != logits.cols())
                    throw LabelMismatch("multilabel row width != logit width");
                break;
        }
    }
}

// log(1 + e^z), overflow-safe
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

}  // namespace

Index head_outputs(Task task, int num_labels) {
    return task == Task::binary ? 2 : num_labels;
}

HeadParams init_head(Index input_dim, Index hidden, Index outputs, std::uint64_t seed) {
    if (input_dim < 1 || hidden < 1 || outputs < 1)
        throw ConfigError("head dimensions must be positive");
    HeadParams params;
    Rng rng1(derive_seed(seed, 1));
    const double bound1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
    params.w1.resize(input_dim, hidden);
    for (Index i = 0; i < input_dim; ++i)
        for (Index j = 0; j < hidden; ++j) params.w1(i, j) = rng1.uniform(-bound1, bound1);
    params.b1 = Vector::Zero(hidden);
    params.ln_gain = Vector::Ones(hidden);
    params.ln_bias = Vector::Zero(hidden);

    Rng rng2(derive_seed(seed, 2));
    const double bound2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    params.w2.resize(hidden, outputs);
    for (Index i = 0; i < hidden; ++i)
        for (Index j = 0; j < outputs; ++j) params.w2(i, j) = rng2.uniform(-bound2, bound2);
    params.b2 = Vector::Zero(outputs);
    return params;
}

Matrix forward(const HeadParams& params, const Matrix& batch) {
    return run_forward(params, batch).logits;
}

double cross_entropy(const Matrix& logits, const std::vector<std::vector<int>>& labels,
                     Task task, Matrix* dlogits) {
    check_labels(logits, labels, task);
    const Index n = logits.rows();
    const Index width = logits.cols();
    if (dlogits) dlogits->setZero(n, width);

    double total = 0.0;
    if (task == Task::multilabel) {
        const double label_scale = 1.0 / static_cast<double>(width);
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < width; ++j) {
                const double z = logits(i, j);
                const double y = labels[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                total += label_scale * (softplus(z) - y * z);
                if (dlogits)
                    (*dlogits)(i, j) = label_scale * (1.0 / (1.0 + std::exp(-z)) - y);
            }
        }
    } else {
        for (Index i = 0; i < n; ++i) {
            const int y = labels[static_cast<std::size_t>(i)][0];
            const double row_max = logits.row(i).maxCoeff();
            const Eigen::RowVectorXd shifted = logits.row(i).array() - row_max;
            const double lse = std::log(shifted.array().exp().sum());
            total += lse - shifted(y);
            if (dlogits) {
                dlogits->row(i) = (shifted.array() - lse).exp();
                (*dlogits)(i, y) -= 1.0;
            }
        }
    }
    total /= static_cast<double>(n);
    if (dlogits) *dlogits /= static_cast<double>(n);
    return total;
}

double loss_and_grad(const HeadParams& params, const Matrix& batch,
                     const std::vector<std::vector<int>>& labels, Task task,
                     HeadGradients& grads) {
    const ForwardCache cache = run_forward(params, batch);
    Matrix dlogits;
    const double loss = cross_entropy(cache.logits, labels, task, &dlogits);

    grads.w2 = cache.activated.transpose() * dlogits;
    grads.b2 = dlogits.colwise().sum().transpose();

    Matrix d_act = dlogits * params.w2.transpose();
    Matrix d_pre_act(d_act.rows(), d_act.cols());
    for (Index i = 0; i < d_act.rows(); ++i)
        for (Index j = 0; j < d_act.cols(); ++j)
            d_pre_act(i, j) = d_act(i, j) * gelu_derivative(cache.pre_act(i, j));

    grads.ln_bias = d_pre_act.colwise().sum().transpose();
    grads.ln_gain = (d_pre_act.array() * cache.normalized.array()).colwise().sum().transpose();

    Matrix d_norm = d_pre_act.array().rowwise() * params.ln_gain.transpose().array();
    Matrix d_pre_norm(d_norm.rows(), d_norm.cols());
    const double hidden = static_cast<double>(params.hidden_dim());
    for (Index i = 0; i < d_norm.rows(); ++i) {
        const double mean_d = d_norm.row(i).mean();
        const double mean_dh =
            (d_norm.row(i).array() * cache.normalized.row(i).array()).sum() / hidden;
        d_pre_norm.row(i) =
            cache.inv_std(i) *
            (d_norm.row(i).array() - mean_d - cache.normalized.row(i).array() * mean_dh);
    }

    grads.w1 = batch.transpose() * d_pre_norm;
    grads.b1 = d_pre_norm.colwise().sum().transpose();
    return loss;
}

namespace {

struct AdamState {
    HeadGradients m;
    HeadGradients v;
    long step = 0;

    explicit AdamState(const HeadParams& params) {
        m.w1.setZero(params.w1.rows(), params.w1.cols());
        m.b1.setZero(params.b1.size());
        m.ln_gain.setZero(params.ln_gain.size());
        m.ln_bias.setZero(params.ln_bias.size());
        m.w2.setZero(params.w2.rows(), params.w2.cols());
        m.b2.setZero(params.b2.size());
        v = m;
    }
};

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

template <typename T>
void adam_update(T& param, T& m, T& v, const T& grad, double lr, double bias1, double bias2) {
    m = kBeta1 * m + (1.0 - kBeta1) * grad;
    v = (kBeta2 * v.array() + (1.0 - kBeta2) * grad.array().square()).matrix();
    param.array() -= lr * (m.array() / bias1) / ((v.array() / bias2).sqrt() + kAdamEps);
}

void apply_adam(HeadParams& params, AdamState& state, const HeadGradients& grads, double lr) {
    ++state.step;
    const double bias1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.step));
    const double bias2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.step));
    adam_update(params.w1, state.m.w1, state.v.w1, grads.w1, lr, bias1, bias2);
    adam_update(params.b1, state.m.b1, state.v.b1, grads.b1, lr, bias1, bias2);
    adam_update(params.ln_gain, state.m.ln_gain, state.v.ln_gain, grads.ln_gain, lr, bias1, bias2);
    adam_update(params.ln_bias, state.m.ln_bias, state.v.ln_bias, grads.ln_bias, lr, bias1, bias2);
    adam_update(params.w2, state.m.w2, state.v.w2, grads.w2, lr, bias1, bias2);
    adam_update(params.b2, state.m.b2, state.v.b2, grads.b2, lr, bias1, bias2);
}

}  // namespace

TrainResult train(const Matrix& train_x, const std::vector<std::vector<int>>& train_y,
                  const Matrix& val_x, const std::vector<std::vector<int>>& val_y, Task task,
                  Index outputs, const TrainConfig& cfg) {
    if (train_x.rows() < 1 || val_x.rows() < 1) throw EmptySplit("train and val must be nonempty");
    if (static_cast<Index>(train_y.size()) != train_x.rows() ||
        static_cast<Index>(val_y.size()) != val_x.rows())
        throw LabelMismatch("label count != sample count");
    if (cfg.lr <= 0.0 || cfg.epochs < 1 || cfg.batch_size < 1)
        throw ConfigError("lr, epochs and batch_size must be positive");
    for (int e : cfg.decay_epochs)
        if (e < 1 || e > cfg.epochs) throw ConfigError("decay epochs must lie within [1, epochs]");

    HeadParams params = init_head(train_x.cols(), cfg.hidden, outputs, cfg.seed);
    AdamState adam(params);
    HeadGradients grads;

    TrainResult result;
    HeadParams best = params;
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    int stale_epochs = 0;

    const Index n = train_x.rows();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        double lr = cfg.lr;
        for (int decay : cfg.decay_epochs)
            if (epoch > decay) lr *= cfg.decay_factor;

        // deterministic per-epoch shuffle
        Rng rng(derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_index(i)]);

        double epoch_loss = 0.0;
        for (Index start = 0; start < n; start += cfg.batch_size) {
            const Index size = std::min<Index>(cfg.batch_size, n - start);
            Matrix batch(size, train_x.cols());
            std::vector<std::vector<int>> batch_y(static_cast<std::size_t>(size));
            for (Index b = 0; b < size; ++b) {
                const Index src = order[static_cast<std::size_t>(start + b)];
                batch.row(b) = train_x.row(src);
                batch_y[static_cast<std::size_t>(b)] = train_y[static_cast<std::size_t>(src)];
            }
            const double loss = loss_and_grad(params, batch, batch_y, task, grads);
            epoch_loss += loss * static_cast<double>(size);
            apply_adam(params, adam, grads, lr);
        }
        epoch_loss /= static_cast<double>(n);

        const double val_loss = cross_entropy(forward(params, val_x), val_y, task);
        result.log.push_back({epoch, epoch_loss, val_loss, lr});

        if (val_loss < best_val) {
            best_val = val_loss;
            best = params;
            best_epoch = epoch;
            stale_epochs = 0;
        } else {
            ++stale_epochs;
            if (stale_epochs > cfg.early_stop_patience) break;
        }
    }

    result.params = std::move(best);
    result.best_epoch = best_epoch;
    return result;
}

void save_head(const HeadParams& params, const HeadMetadata& meta,
               const std::filesystem::path& json_path) {
    const std::filesystem::path dir = json_path.parent_path();
    const std::string stem = json_path.stem().string();

    const auto write_vec = [&](const Vector& v, const std::string& name) {
        Tensor tensor;
        tensor.dims = {static_cast<std::uint64_t>(v.size())};
        tensor.data.assign(v.data(), v.data() + v.size());
        write_tensor(dir / name, tensor);
    };
    write_matrix(dir / (stem + ".w1.fvt"), params.w1);
    write_vec(params.b1, stem + ".b1.fvt");
    write_vec(params.ln_gain, stem + ".g.fvt");
    write_vec(params.ln_bias, stem + ".bt.fvt");
    write_matrix(dir / (stem + ".w2.fvt"), params.w2);
    write_vec(params.b2, stem + ".b2.fvt");

    nlohmann::ordered_json doc;
    doc["task"] = to_string(meta.task);
    doc["input_dim"] = params.input_dim();
    doc["hidden"] = params.hidden_dim();
    doc["outputs"] = params.output_dim();
    doc["seed"] = meta.seed;
    doc["best_epoch"] = meta.best_epoch;
    doc["tensors"] = {{"w1", stem + ".w1.fvt"}, {"b1", stem + ".b1.fvt"},
                      {"ln_gain", stem + ".g.fvt"}, {"ln_bias", stem + ".bt.fvt"},
                      {"w2", stem + ".w2.fvt"}, {"b2", stem + ".b2.fvt"}};
    std::ofstream out(json_path, std::ios::trunc);
    if (!out) throw MissingPath("cannot open " + json_path.string() + " for writing");
    out << doc.dump(2) << "\n";
}

HeadParams load_head(const std::filesystem::path& json_path, HeadMetadata* meta) {
    std::ifstream in(json_path);
    if (!in) throw MissingPath("cannot open head metadata " + json_path.string());
    nlohmann::json doc;
    in >> doc;
    const std::filesystem::path dir = json_path.parent_path();
    const auto tensor_path = [&](const char* key) {
        return dir / doc.at("tensors").at(key).get<std::string>();
    };
    const auto read_vec = [&](const char* key) {
        const Tensor tensor = read_tensor(tensor_path(key));
        return Vector(Eigen::Map<const Vector>(tensor.data.data(),
                                               static_cast<Index>(tensor.data.size())));
    };

    HeadParams params;
    params.w1 = read_matrix(tensor_path("w1"));
    params.b1 = read_vec("b1");
    params.ln_gain = read_vec("ln_gain");
    params.ln_bias = read_vec("ln_bias");
    params.w2 = read_matrix(tensor_path("w2"));
    params.b2 = read_vec("b2");
    if (meta) {
        meta->task = task_from_string(doc.at("task").get<std::string>());
        meta->seed = doc.at("seed").get<std::uint64_t>();
        meta->best_epoch = doc.at("best_epoch").get<int>();
    }
    return params;
}

void save_train_log(const std::vector<TrainLogEntry>& log, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw MissingPath("cannot open " + path.string() + " for writing");
    for (const TrainLogEntry& entry : log) {
        nlohmann::ordered_json line;
        line["epoch"] = entry.epoch;
        line["train_loss"] = entry.train_loss;
        line["val_loss"] = entry.val_loss;
        line["lr"] = entry.lr;
        out << line.dump() << "\n";
    }
}

}  // namespace fvenc
