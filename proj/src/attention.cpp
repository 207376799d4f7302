#include "fvenc/attention.hpp"

#include <cmath>
#include <string>

#include "fvenc/errors.hpp"
#include "fvenc/rng.hpp"

namespace fvenc {

namespace {

void check_shapes(const Matrix& x, const AttentionParams& params) {
    if (params.w_q.rows() != x.cols() || params.w_k.rows() != x.cols() ||
        params.w_v.rows() != x.cols())
        throw ShapeMismatch("input dim " + std::to_string(x.cols()) +
                            " does not match projection rows " +
                            std::to_string(params.w_q.rows()));
    if (params.w_q.cols() != params.w_k.cols() || params.w_q.cols() != params.w_v.cols())
        throw ShapeMismatch("projection matrices disagree on head dim");
    if (x.rows() < 1) throw ShapeMismatch("need at least one token");
}

}  // namespace

AttentionParams make_attention_params(Index input_dim, Index head_dim, std::uint64_t seed) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
    AttentionParams params;
    Matrix* targets[3] = {&params.w_q, &params.w_k, &params.w_v};
    for (int t = 0; t < 3; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        Matrix& m = *targets[t];
        m.resize(input_dim, head_dim);
        for (Index i = 0; i < input_dim; ++i)
            for (Index j = 0; j < head_dim; ++j) m(i, j) = rng.uniform(-bound, bound);
    }
    return params;
}

Matrix softmax_similarity(const Matrix& x, const AttentionParams& params) {
    check_shapes(x, params);
    const Matrix q = x * params.w_q;
    const Matrix k = x * params.w_k;

    const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
    Matrix scores = (q * k.transpose()) * scale;
    for (Index i = 0; i < scores.rows(); ++i) {
        const double row_max = scores.row(i).maxCoeff();
        scores.row(i) = (scores.row(i).array() - row_max).exp();
        scores.row(i) /= scores.row(i).sum();
    }
    return scores;
}

Matrix relu_linear_similarity(const Matrix& x, const AttentionParams& params, double eps) {
    check_shapes(x, params);
    if (eps <= 0.0) throw ConfigError("eps must be positive");
    const Matrix rq = (x * params.w_q).cwiseMax(0.0);
    const Matrix rk = (x * params.w_k).cwiseMax(0.0);

    Matrix sim = rq * rk.transpose();
    for (Index i = 0; i < sim.rows(); ++i)
        sim.row(i) /= std::max(sim.row(i).sum(), eps);
    return sim;
}

Matrix softmax_attention(const Matrix& x, const AttentionParams& params) {
    return softmax_similarity(x, params) * (x * params.w_v);
}

Matrix relu_linear_attention(const Matrix& x, const AttentionParams& params, double eps) {
    return relu_linear_similarity(x, params, eps) * (x * params.w_v);
}

}  // namespace fvenc
