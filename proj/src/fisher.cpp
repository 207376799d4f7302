#include "fvenc/fisher.hpp"

#include <cmath>
#include <string>

#include "fvenc/errors.hpp"

namespace fvenc {

std::size_t fv_length(int components, int dim) {
    if (components < 1 || dim < 1) throw ConfigError("fv_length needs K, d >= 1");
    return static_cast<std::size_t>(components) * (2 * static_cast<std::size_t>(dim) + 1);
}

FisherVector encode(const DiagGmm& gmm, const Matrix& features) {
    if (features.rows() < 1) throw EmptyFeatureSet("no local features to encode");
    if (features.cols() != gmm.dim())
        throw DimMismatch("feature dim " + std::to_string(features.cols()) +
                          " != model dim " + std::to_string(gmm.dim()));

    const Index k = gmm.components();
    const Index d = gmm.dim();
    const double t = static_cast<double>(features.rows());
    const Matrix resp = posteriors(gmm, features);
    const Matrix sigma = gmm.variances.cwiseSqrt();

    FisherVector fv;
    fv.values.resize(static_cast<Index>(fv_length(static_cast<int>(k), static_cast<int>(d))));

    for (Index j = 0; j < k; ++j) {
        const double w = gmm.weights(j);
        const double weight_scale = 1.0 / (t * std::sqrt(w));
        const double var_scale = 1.0 / (t * std::sqrt(2.0 * w));

        fv.values(j) = (resp.col(j).array() - w).sum() * weight_scale;

        // standardized deviations, T x d
        const Matrix z = (features.rowwise() - gmm.means.row(j)).array().rowwise() /
                         sigma.row(j).array();
        const Eigen::RowVectorXd mean_grad =
            (z.array().colwise() * resp.col(j).array()).colwise().sum() * weight_scale;
        const Eigen::RowVectorXd var_grad =
            ((z.array().square() - 1.0).colwise() * resp.col(j).array()).colwise().sum() *
            var_scale;

        fv.values.segment(k + j * d, d) = mean_grad.transpose();
        fv.values.segment(k + k * d + j * d, d) = var_grad.transpose();
    }
    return fv;
}

FisherVector normalize(const FisherVector& fv, double alpha) {
    FisherVector out;
    out.values.resize(fv.values.size());
    for (Index i = 0; i < fv.values.size(); ++i) {
        const double z = fv.values(i);
        out.values(i) = std::copysign(std::pow(std::abs(z), alpha), z);
    }
    const double norm = out.values.norm();
    if (norm > 0.0) out.values /= norm;
    out.normalized = true;
    return out;
}

}  // namespace fvenc
