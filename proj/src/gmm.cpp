#include "fvenc/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include <json.hpp>

#include "fvenc/errors.hpp"
#include "fvenc/parallel.hpp"
#include "fvenc/rng.hpp"
#include "fvenc/tensor_io.hpp"

namespace fvenc {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void check_model(const DiagGmm& gmm) {
    if (gmm.components() < 1) throw ConfigError("mixture has no components");
    if (gmm.means.rows() != gmm.components() || gmm.variances.rows() != gmm.components() ||
        gmm.means.cols() != gmm.variances.cols())
        throw DimMismatch("weights/means/variances shapes disagree");
}

// Per-row, per-component log(w_k) + log N(x | mu_k, var_k).
Matrix weighted_log_gauss(const DiagGmm& gmm, const Matrix& data, int threads) {
    check_model(gmm);
    if (data.cols() != gmm.dim())
        throw DimMismatch("data dim " + std::to_string(data.cols()) + " != model dim " +
                          std::to_string(gmm.dim()));
    const Index k = gmm.components();

    Vector log_const(k);
    for (Index j = 0; j < k; ++j)
        log_const(j) = std::log(gmm.weights(j)) -
                       0.5 * (gmm.dim() * kLog2Pi + gmm.variances.row(j).array().log().sum());

    Matrix log_joint(data.rows(), k);
    parallel_for(static_cast<std::size_t>(data.rows()), threads, [&](std::size_t t) {
        const auto row = data.row(static_cast<Index>(t));
        for (Index j = 0; j < k; ++j) {
            const double quad = ((row - gmm.means.row(j)).array().square() /
                                 gmm.variances.row(j).array())
                                    .sum();
            log_joint(static_cast<Index>(t), j) = log_const(j) - 0.5 * quad;
        }
    });
    return log_joint;
}

double log_sum_exp_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    const double m = row.maxCoeff();
    return m + std::log((row.array() - m).exp().sum());
}

// k-means++ seeding: first center uniform, then squared-distance weighted.
Matrix kmeanspp_centers(const Matrix& data, int k, Rng& rng) {
    const Index n = data.rows();
    Matrix centers(k, data.cols());
    centers.row(0) = data.row(static_cast<Index>(rng.uniform_index(n)));

    Vector min_sq = (data.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        const double total = min_sq.sum();
        Index pick = 0;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double cumulative = 0.0;
            pick = n - 1;
            for (Index i = 0; i < n; ++i) {
                cumulative += min_sq(i);
                if (cumulative >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<Index>(rng.uniform_index(n));
        }
        centers.row(c) = data.row(pick);
        min_sq = min_sq.cwiseMin((data.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }
    return centers;
}

}  // namespace

EmResult fit_em(const Matrix& data, int components, const EmOptions& opts) {
    const Index n = data.rows();
    const Index d = data.cols();
    if (components < 1) throw ConfigError("need at least one component");
    if (n <= components)
        throw TooFewSamples("need more samples than components: T=" + std::to_string(n) +
                            ", K=" + std::to_string(components));
    if (d < 1) throw DimMismatch("data has no columns");

    const Eigen::RowVectorXd grand_mean = data.colwise().mean();
    Eigen::RowVectorXd global_var =
        (data.rowwise() - grand_mean).array().square().colwise().mean();
    const double max_std = std::sqrt(global_var.maxCoeff());
    if (max_std == 0.0) throw DegenerateData("all rows identical");
    const double reg = opts.reg_scale * max_std;
    if (!(reg > 0.0)) throw ConfigError("reg_scale must be positive");

    DiagGmm gmm;
    gmm.reg = reg;
    gmm.weights = Vector::Constant(components, 1.0 / components);
    Rng rng(opts.seed);
    gmm.means = kmeanspp_centers(data, components, rng);
    gmm.variances = (global_var.array() + reg).matrix().replicate(components, 1);

    EmResult result;
    const double mass_floor = 1e-6 * static_cast<double>(n);
    double previous = -std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < opts.max_iters; ++iter) {
        // E-step
        Matrix log_joint = weighted_log_gauss(gmm, data, opts.threads);
        Vector row_lse(n);
        for (Index t = 0; t < n; ++t) row_lse(t) = log_sum_exp_row(log_joint.row(t));
        const double mean_ll = row_lse.mean();

        Matrix resp(n, components);
        for (Index t = 0; t < n; ++t)
            resp.row(t) = (log_joint.row(t).array() - row_lse(t)).exp();

        // Rescue components whose mass collapsed: park them on the sample the
        // current mixture explains worst.
        bool rescued = false;
        for (Index j = 0; j < components; ++j) {
            if (resp.col(j).sum() >= mass_floor) continue;
            Index worst = 0;
            row_lse.minCoeff(&worst);
            gmm.means.row(j) = data.row(worst);
            gmm.variances.row(j) = (global_var.array() + reg).matrix();
            gmm.weights(j) = 1.0 / static_cast<double>(n);
            gmm.weights /= gmm.weights.sum();
            rescued = true;
        }
        if (rescued) {
            log_joint = weighted_log_gauss(gmm, data, opts.threads);
            for (Index t = 0; t < n; ++t) row_lse(t) = log_sum_exp_row(log_joint.row(t));
            for (Index t = 0; t < n; ++t)
                resp.row(t) = (log_joint.row(t).array() - row_lse(t)).exp();
        }

        // M-step; accumulation runs in fixed sample order so the result does
        // not depend on the thread count.
        Vector mass = Vector::Zero(components);
        Matrix mean_acc = Matrix::Zero(components, d);
        Matrix sq_acc = Matrix::Zero(components, d);
        for (Index t = 0; t < n; ++t) {
            for (Index j = 0; j < components; ++j) {
                const double r = resp(t, j);
                mass(j) += r;
                mean_acc.row(j) += r * data.row(t);
                sq_acc.row(j) += r * data.row(t).array().square().matrix();
            }
        }
        for (Index j = 0; j < components; ++j) {
            gmm.weights(j) = mass(j) / static_cast<double>(n);
            gmm.means.row(j) = mean_acc.row(j) / mass(j);
            gmm.variances.row(j) =
                (sq_acc.row(j).array() / mass(j) - gmm.means.row(j).array().square() + reg)
                    .cwiseMax(reg)
                    .matrix();
        }
        gmm.weights /= gmm.weights.sum();

        result.loglik_trace.push_back(mean_ll);
        result.iterations = iter + 1;
        if (iter > 0) {
            const double rel = std::abs(mean_ll - previous) /
                               std::max(1.0, std::abs(previous));
            if (rel < opts.rel_tol) break;
        }
        previous = mean_ll;
    }

    result.model = std::move(gmm);
    return result;
}

double log_density(const DiagGmm& gmm, const Eigen::Ref<const Vector>& x) {
    check_model(gmm);
    if (x.size() != gmm.dim())
        throw DimMismatch("point dim " + std::to_string(x.size()) + " != model dim " +
                          std::to_string(gmm.dim()));
    Eigen::RowVectorXd terms(gmm.components());
    for (Index j = 0; j < gmm.components(); ++j) {
        const double quad =
            ((x.transpose() - gmm.means.row(j)).array().square() / gmm.variances.row(j).array())
                .sum();
        terms(j) = std::log(gmm.weights(j)) -
                   0.5 * (gmm.dim() * kLog2Pi + gmm.variances.row(j).array().log().sum() + quad);
    }
    return log_sum_exp_row(terms);
}

Vector log_densities(const DiagGmm& gmm, const Matrix& data) {
    const Matrix log_joint = weighted_log_gauss(gmm, data, 1);
    Vector out(data.rows());
    for (Index t = 0; t < data.rows(); ++t) out(t) = log_sum_exp_row(log_joint.row(t));
    return out;
}

Matrix posteriors(const DiagGmm& gmm, const Matrix& data) {
    const Matrix log_joint = weighted_log_gauss(gmm, data, 1);
    Matrix resp(data.rows(), gmm.components());
    for (Index t = 0; t < data.rows(); ++t) {
        const double lse = log_sum_exp_row(log_joint.row(t));
        resp.row(t) = (log_joint.row(t).array() - lse).exp();
    }
    return resp;
}

Matrix sample(const DiagGmm& gmm, std::size_t n, std::uint64_t seed) {
    check_model(gmm);
    if (n < 1) throw ConfigError("need at least one draw");
    Rng rng(seed);
    Matrix out(static_cast<Index>(n), gmm.dim());
    const Matrix stds = gmm.variances.cwiseSqrt();
    for (Index i = 0; i < out.rows(); ++i) {
        const double u = rng.uniform();
        Index j = gmm.components() - 1;
        double cumulative = 0.0;
        for (Index c = 0; c < gmm.components(); ++c) {
            cumulative += gmm.weights(c);
            if (u < cumulative) {
                j = c;
                break;
            }
        }
        for (Index col = 0; col < gmm.dim(); ++col)
            out(i, col) = gmm.means(j, col) + stds(j, col) * rng.normal();
    }
    return out;
}

void save_gmm(const DiagGmm& gmm, const GmmMetadata& meta,
              const std::filesystem::path& json_path) {
    check_model(gmm);
    const std::filesystem::path dir = json_path.parent_path();
    const std::string stem = json_path.stem().string();
    const std::string w_name = stem + ".w.fvt";
    const std::string mu_name = stem + ".mu.fvt";
    const std::string var_name = stem + ".var.fvt";

    Tensor weights;
    weights.dims = {static_cast<std::uint64_t>(gmm.components())};
    weights.data.assign(gmm.weights.data(), gmm.weights.data() + gmm.weights.size());
    write_tensor(dir / w_name, weights);
    write_matrix(dir / mu_name, gmm.means);
    write_matrix(dir / var_name, gmm.variances);

    nlohmann::ordered_json doc;
    doc["K"] = gmm.components();
    doc["d"] = gmm.dim();
    doc["reg"] = gmm.reg;
    doc["seed"] = meta.seed;
    doc["rng"] = Rng::kAlgorithm;
    doc["loglik_trace"] = meta.loglik_trace;
    doc["tensors"] = {{"weights", w_name}, {"means", mu_name}, {"variances", var_name}};
    std::ofstream out(json_path, std::ios::trunc);
    if (!out) throw MissingPath("cannot open " + json_path.string() + " for writing");
    out << doc.dump(2) << "\n";
}

DiagGmm load_gmm(const std::filesystem::path& json_path, GmmMetadata* meta) {
    std::ifstream in(json_path);
    if (!in) throw MissingPath("cannot open gmm metadata " + json_path.string());
    nlohmann::json doc;
    in >> doc;

    const std::filesystem::path dir = json_path.parent_path();
    DiagGmm gmm;
    const Tensor weights = read_tensor(dir / doc.at("tensors").at("weights").get<std::string>());
    gmm.weights = Eigen::Map<const Vector>(weights.data.data(),
                                           static_cast<Index>(weights.data.size()));
    gmm.means = read_matrix(dir / doc.at("tensors").at("means").get<std::string>());
    gmm.variances = read_matrix(dir / doc.at("tensors").at("variances").get<std::string>());
    gmm.reg = doc.at("reg").get<double>();
    if (meta) {
        meta->seed = doc.at("seed").get<std::uint64_t>();
        meta->loglik_trace = doc.at("loglik_trace").get<std::vector<double>>();
    }
    check_model(gmm);
    if (gmm.components() != doc.at("K").get<Index>() || gmm.dim() != doc.at("d").get<Index>())
        throw DimMismatch("gmm tensors disagree with metadata in " + json_path.string());
    return gmm;
}

}  // namespace fvenc
