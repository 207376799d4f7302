#include "fvenc/kl.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "fvenc/errors.hpp"
#include "fvenc/parallel.hpp"
#include "fvenc/rng.hpp"

namespace fvenc {

namespace {

constexpr std::size_t kChunk = 4096;

}  // namespace

KlEstimate kl_mc(const DiagGmm& f, const DiagGmm& g, std::size_t n, std::uint64_t seed,
                 int threads) {
    if (f.dim() != g.dim())
        throw DimMismatch("mixtures live in different dimensions: " + std::to_string(f.dim()) +
                          " vs " + std::to_string(g.dim()));
    if (n < 1) throw ConfigError("need at least one sample");

    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    std::vector<double> chunk_sum(chunks, 0.0);
    std::vector<double> chunk_sq(chunks, 0.0);

    const Matrix f_stds = f.variances.cwiseSqrt();
    parallel_for(chunks, threads, [&](std::size_t c) {
        Rng rng(derive_seed(seed, c));
        const std::size_t begin = c * kChunk;
        const std::size_t end = std::min(n, begin + kChunk);
        Vector x(f.dim());
        double sum = 0.0;
        double sq = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const double u = rng.uniform();
            Index j = f.components() - 1;
            double cumulative = 0.0;
            for (Index comp = 0; comp < f.components(); ++comp) {
                cumulative += f.weights(comp);
                if (u < cumulative) {
                    j = comp;
                    break;
                }
            }
            for (Index col = 0; col < f.dim(); ++col)
                x(col) = f.means(j, col) + f_stds(j, col) * rng.normal();
            const double ratio = log_density(f, x) - log_density(g, x);
            sum += ratio;
            sq += ratio * ratio;
        }
        chunk_sum[c] = sum;
        chunk_sq[c] = sq;
    });

    double total = 0.0;
    double total_sq = 0.0;
    for (std::size_t c = 0; c < chunks; ++c) {
        total += chunk_sum[c];
        total_sq += chunk_sq[c];
    }

    KlEstimate estimate;
    estimate.n_samples = n;
    estimate.seed = seed;
    estimate.rng = Rng::kAlgorithm;
    estimate.value = total / static_cast<double>(n);
    if (n > 1) {
        const double variance =
            (total_sq - static_cast<double>(n) * estimate.value * estimate.value) /
            static_cast<double>(n - 1);
        estimate.std_error = std::sqrt(std::max(variance, 0.0) / static_cast<double>(n));
    }
    return estimate;
}

double kl_gaussian_closed(const DiagGmm& f, const DiagGmm& g) {
    if (f.components() != 1 || g.components() != 1)
        throw NotSingleComponent("closed form needs K=1 on both sides");
    if (f.dim() != g.dim()) throw DimMismatch("dimension mismatch");

    double total = 0.0;
    for (Index col = 0; col < f.dim(); ++col) {
        const double vf = f.variances(0, col);
        const double vg = g.variances(0, col);
        const double dm = f.means(0, col) - g.means(0, col);
        total += 0.5 * std::log(vg / vf) + (vf + dm * dm) / (2.0 * vg) - 0.5;
    }
    return total;
}

}  // namespace fvenc
