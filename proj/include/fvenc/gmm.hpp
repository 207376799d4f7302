#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fvenc/linalg.hpp"

namespace fvenc {

// Diagonal-covariance Gaussian mixture. Weights sum to 1; every variance is
// at least `reg`, the floor actually applied during fitting.
struct DiagGmm {
    Vector weights;    // K
    Matrix means;      // K x d
    Matrix variances;  // K x d
    double reg = 0.0;

    Index components() const { return weights.size(); }
    Index dim() const { return means.cols(); }
};

struct EmOptions {
    int max_iters = 100;
    double rel_tol = 1e-6;
    std::uint64_t seed = 0;
    double reg_scale = 1e-4;  // floor = reg_scale * max per-dim std of the data
    int threads = 1;
};

struct EmResult {
    DiagGmm model;
    std::vector<double> loglik_trace;  // mean log-likelihood after each iteration
    int iterations = 0;
};

// Maximum-likelihood EM fit. k-means++ seeded means, uniform weights,
// global per-dimension variance as the starting spread. Each M-step adds the
// variance floor, so the fit is well-defined even on nearly collapsed
// components. Deterministic given the seed, for any thread count.
EmResult fit_em(const Matrix& data, int components, const EmOptions& opts = {});

double log_density(const DiagGmm& gmm, const Eigen::Ref<const Vector>& x);
Vector log_densities(const DiagGmm& gmm, const Matrix& data);

// Posterior responsibilities, T x K, computed in log-space. Rows sum to 1.
Matrix posteriors(const DiagGmm& gmm, const Matrix& data);

// n draws: categorical component choice, then a diagonal Gaussian draw.
Matrix sample(const DiagGmm& gmm, std::size_t n, std::uint64_t seed);

// Serialized as one JSON metadata file plus sibling FVT1 tensors for
// weights/means/variances. `json_path` names the metadata file.
struct GmmMetadata {
    std::uint64_t seed = 0;
    std::vector<double> loglik_trace;
};
void save_gmm(const DiagGmm& gmm, const GmmMetadata& meta,
              const std::filesystem::path& json_path);
DiagGmm load_gmm(const std::filesystem::path& json_path, GmmMetadata* meta = nullptr);

}  // namespace fvenc
