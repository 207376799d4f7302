#include <doctest.h>

#include <cmath>
#include <random>

#include "fvenc/errors.hpp"
#include "fvenc/fisher.hpp"
#include "helpers.hpp"

using namespace fvenc;

namespace {

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

// Direct scalar-loop evaluation: responsibilities via plain densities, then
// the three gradient formulas term by term.
std::vector<double> encode_ref(const DiagGmm& gmm, const Matrix& features) {
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
            double g_mu = 0.0;
            double g_sigma = 0.0;
            for (int t = 0; t < t_count; ++t) {
                const double diff = features(t, c) - gmm.means(j, c);
                g_mu += gamma[t][j] * (diff / sigma);
                g_sigma += gamma[t][j] * (diff * diff / (sigma * sigma) - 1.0);
            }
            fv[static_cast<std::size_t>(k + j * d + c)] = g_mu / (t_count * std::sqrt(w));
            fv[static_cast<std::size_t>(k + k * d + j * d + c)] =
                g_sigma / (t_count * std::sqrt(2.0 * w));
        }
    }
    return fv;
}

}  // namespace

TEST_CASE("fv_length is K(2d+1)") {
    CHECK(fv_length(16, 192) == 6160);
    CHECK(fv_length(1, 1) == 3);
    CHECK(fv_length(16, 96) == 3088);
}

TEST_CASE("features sitting exactly on the mean give the closed-form vector") {
    DiagGmm gmm;
    gmm.weights = Vector::Ones(1);
    gmm.means.resize(1, 3);
    gmm.means << 0.4, -1.2, 2.0;
    gmm.variances = Matrix::Constant(1, 3, 0.7);
    gmm.reg = 1e-8;

    Matrix features(5, 3);
    for (Index t = 0; t < 5; ++t) features.row(t) = gmm.means.row(0);

    const FisherVector fv = encode(gmm, features);
    REQUIRE(fv.values.size() == 7);
    CHECK(fv.values(0) == 0.0);  // weight part
    for (int c = 0; c < 3; ++c) CHECK(fv.values(1 + c) == 0.0);
    for (int c = 0; c < 3; ++c)
        CHECK(fv.values(4 + c) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-13));
}

TEST_CASE("duplicating the feature set leaves the encoding unchanged") {
    const DiagGmm gmm = random_gmm(3, 4, 5);
    const Matrix features = testutil::random_matrix(11, 4, 6, -2.0, 2.0);
    Matrix doubled(22, 4);
    doubled << features, features;

    const FisherVector once = encode(gmm, features);
    const FisherVector twice = encode(gmm, doubled);
    CHECK((once.values - twice.values).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("encoding is invariant under row permutation") {
    const DiagGmm gmm = random_gmm(2, 3, 15);
    const Matrix features = testutil::random_matrix(9, 3, 16, -2.0, 2.0);
    Matrix reversed(9, 3);
    for (Index t = 0; t < 9; ++t) reversed.row(t) = features.row(8 - t);
    const FisherVector a = encode(gmm, features);
    const FisherVector b = encode(gmm, reversed);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("matches the scalar-loop reference on random instances") {
    std::mt19937 gen(31);
    std::uniform_int_distribution<int> pick_k(1, 4);
    std::uniform_int_distribution<int> pick_d(1, 5);
    std::uniform_int_distribution<int> pick_t(1, 20);
    for (int trial = 0; trial < 300; ++trial) {
        const int k = pick_k(gen);
        const int d = pick_d(gen);
        const int t = pick_t(gen);
        const DiagGmm gmm = random_gmm(k, d, 1000 + trial);
        const Matrix features =
            testutil::random_matrix(t, d, 2000 + trial, -2.5, 2.5);
        const FisherVector fv = encode(gmm, features);
        const auto ref = encode_ref(gmm, features);
        REQUIRE(fv.values.size() == static_cast<Index>(ref.size()));
        for (Index i = 0; i < fv.values.size(); ++i)
            CHECK(std::abs(fv.values(i) - ref[static_cast<std::size_t>(i)]) < 1e-10);
    }
}

TEST_CASE("normalize applies a signed power then unit L2") {
    FisherVector fv;
    fv.values.resize(2);
    fv.values << 4.0, -4.0;
    const FisherVector out = normalize(fv, 0.5);
    CHECK(out.values(0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(out.values(1) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(out.normalized);

    FisherVector zero;
    zero.values = Vector::Zero(5);
    const FisherVector zout = normalize(zero, 0.5);
    CHECK(zout.values.cwiseAbs().maxCoeff() == 0.0);
    CHECK(zout.normalized);

    FisherVector random;
    random.values = testutil::random_matrix(7, 1, 44).col(0);
    CHECK(normalize(random, 0.5).values.norm() == doctest::Approx(1.0).epsilon(1e-12));

    // alpha=1 on an already unit vector is the identity
    const FisherVector unit = normalize(random, 1.0);
    const FisherVector unit2 = normalize(unit, 1.0);
    CHECK((unit.values - unit2.values).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("empty feature sets and dim mismatches are errors") {
    const DiagGmm gmm = random_gmm(2, 3, 77);
    CHECK_THROWS_AS(encode(gmm, Matrix(0, 3)), EmptyFeatureSet);
    CHECK_THROWS_AS(encode(gmm, testutil::random_matrix(4, 2, 78)), DimMismatch);
}
