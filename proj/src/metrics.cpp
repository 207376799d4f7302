#include "fvenc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>

#include <json.hpp>

#include "fvenc/errors.hpp"

namespace fvenc {

std::string to_string(TiePolicy policy) {
    return policy == TiePolicy::half ? "half" : "paper";
}

TiePolicy tie_policy_from_string(const std::string& name) {
    if (name == "half") return TiePolicy::half;
    if (name == "paper") return TiePolicy::paper;
    throw ConfigError("unknown tie policy '" + name + "'");
}

double accuracy(const std::vector<std::vector<int>>& truth,
                const std::vector<std::vector<int>>& predicted, Task task) {
    if (truth.size() != predicted.size() || truth.empty())
        throw ShapeMismatch("truth and prediction counts disagree or are empty");
    double total = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i].size() != predicted[i].size())
            throw ShapeMismatch("label width mismatch at sample " + std::to_string(i));
        if (task != Task::multilabel && truth[i].size() != 1)
            throw ShapeMismatch("expected a single label column per sample");
        std::size_t hits = 0;
        for (std::size_t j = 0; j < truth[i].size(); ++j)
            if (truth[i][j] == predicted[i][j]) ++hits;
        total += static_cast<double>(hits) / static_cast<double>(truth[i].size());
    }
    return total / static_cast<double>(truth.size());
}

double auc_binary(const std::vector<double>& scores, const std::vector<int>& labels,
                  TiePolicy policy) {
    if (scores.size() != labels.size() || scores.empty())
        throw ShapeMismatch("scores and labels disagree or are empty");

    std::uint64_t positives = 0;
    for (int label : labels) positives += label != 0;
    const std::uint64_t negatives = scores.size() - positives;
    if (positives == 0 || negatives == 0)
        throw SingleClass("AUC needs at least one positive and one negative");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // sweep ascending, grouping tied scores
    std::uint64_t strict_pairs = 0;  // negative strictly below positive
    std::uint64_t tie_pairs = 0;
    std::uint64_t negatives_below = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        std::uint64_t group_pos = 0;
        std::uint64_t group_neg = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]] != 0)
                ++group_pos;
            else
                ++group_neg;
            ++j;
        }
        strict_pairs += group_pos * negatives_below;
        tie_pairs += group_pos * group_neg;
        negatives_below += group_neg;
        i = j;
    }

    const double denom = static_cast<double>(positives) * static_cast<double>(negatives);
    if (policy == TiePolicy::paper)
        return static_cast<double>(strict_pairs) / denom;
    return (static_cast<double>(strict_pairs) + 0.5 * static_cast<double>(tie_pairs)) / denom;
}

OvrAuc auc_multiclass_ovr(const Matrix& scores, const std::vector<int>& labels,
                          TiePolicy policy) {
    if (static_cast<Index>(labels.size()) != scores.rows())
        throw ShapeMismatch("label count != score rows");
    const Index classes = scores.cols();
    if (classes < 2) throw ShapeMismatch("need at least two classes");

    OvrAuc result;
    result.per_class.resize(static_cast<std::size_t>(classes));
    double sum = 0.0;
    int counted = 0;
    for (Index c = 0; c < classes; ++c) {
        std::vector<double> class_scores(labels.size());
        std::vector<int> class_labels(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            class_scores[i] = scores(static_cast<Index>(i), c);
            class_labels[i] = labels[i] == static_cast<int>(c) ? 1 : 0;
        }
        try {
            const double value = auc_binary(class_scores, class_labels, policy);
            result.per_class[static_cast<std::size_t>(c)] = value;
            sum += value;
            ++counted;
        } catch (const SingleClass&) {
            // class absent from the split; excluded from the macro average
        }
    }
    if (counted == 0) throw SingleClass("no class has both populations");
    result.macro = sum / counted;
    return result;
}

std::vector<std::pair<double, double>> roc_curve(const std::vector<double>& scores,
                                                 const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw ShapeMismatch("scores and labels disagree or are empty");
    std::uint64_t positives = 0;
    for (int label : labels) positives += label != 0;
    const std::uint64_t negatives = scores.size() - positives;
    if (positives == 0 || negatives == 0)
        throw SingleClass("ROC needs at least one positive and one negative");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::vector<std::pair<double, double>> points;
    points.emplace_back(0.0, 0.0);
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]] != 0)
                ++tp;
            else
                ++fp;
            ++j;
        }
        points.emplace_back(static_cast<double>(fp) / static_cast<double>(negatives),
                            static_cast<double>(tp) / static_cast<double>(positives));
        i = j;
    }
    return points;
}

std::vector<std::vector<int>> predict_labels(const Matrix& logits, Task task) {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(logits.rows()));
    for (Index i = 0; i < logits.rows(); ++i) {
        if (task == Task::multilabel) {
            std::vector<int> row(static_cast<std::size_t>(logits.cols()));
            for (Index j = 0; j < logits.cols(); ++j)
                row[static_cast<std::size_t>(j)] = logits(i, j) >= 0.0 ? 1 : 0;  // sigmoid >= 0.5
            out[static_cast<std::size_t>(i)] = std::move(row);
        } else {
            Index best = 0;
            for (Index j = 1; j < logits.cols(); ++j)
                if (logits(i, j) > logits(i, best)) best = j;  // ties keep the lowest index
            out[static_cast<std::size_t>(i)] = {static_cast<int>(best)};
        }
    }
    return out;
}

Matrix predict_scores(const Matrix& logits, Task task) {
    Matrix scores(logits.rows(), logits.cols());
    if (task == Task::multilabel) {
        scores = logits.unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
    } else {
        for (Index i = 0; i < logits.rows(); ++i) {
            const double row_max = logits.row(i).maxCoeff();
            const Eigen::RowVectorXd e = (logits.row(i).array() - row_max).exp();
            scores.row(i) = e / e.sum();
        }
    }
    return scores;
}

MetricsReport evaluate(const Matrix& logits, const std::vector<std::vector<int>>& truth,
                       Task task, int num_labels, TiePolicy policy) {
    MetricsReport report;
    report.task = task;
    report.n_samples = static_cast<int>(logits.rows());
    report.num_labels = num_labels;
    report.tie_policy = policy;
    report.acc = accuracy(truth, predict_labels(logits, task), task);

    const Matrix scores = predict_scores(logits, task);
    if (task == Task::binary) {
        std::vector<double> s(truth.size());
        std::vector<int> y(truth.size());
        for (std::size_t i = 0; i < truth.size(); ++i) {
            s[i] = scores(static_cast<Index>(i), 1);  // probability of the positive class
            y[i] = truth[i][0];
        }
        report.auc = auc_binary(s, y, policy);
        report.per_label_auc = {report.auc};
        report.roc_points = {roc_curve(s, y)};
    } else if (task == Task::multiclass) {
        std::vector<int> y(truth.size());
        for (std::size_t i = 0; i < truth.size(); ++i) y[i] = truth[i][0];
        const OvrAuc ovr = auc_multiclass_ovr(scores, y, policy);
        report.auc = ovr.macro;
        report.per_label_auc = ovr.per_class;
        for (Index c = 0; c < scores.cols(); ++c) {
            std::vector<double> s(truth.size());
            std::vector<int> yc(truth.size());
            for (std::size_t i = 0; i < truth.size(); ++i) {
                s[i] = scores(static_cast<Index>(i), c);
                yc[i] = y[i] == static_cast<int>(c) ? 1 : 0;
            }
            if (report.per_label_auc[static_cast<std::size_t>(c)])
                report.roc_points.push_back(roc_curve(s, yc));
            else
                report.roc_points.emplace_back();
        }
    } else {
        report.per_label_auc.resize(static_cast<std::size_t>(num_labels));
        double sum = 0.0;
        int counted = 0;
        for (int j = 0; j < num_labels; ++j) {
            std::vector<double> s(truth.size());
            std::vector<int> y(truth.size());
            for (std::size_t i = 0; i < truth.size(); ++i) {
                s[i] = scores(static_cast<Index>(i), j);
                y[i] = truth[i][static_cast<std::size_t>(j)];
            }
            try {
                const double value = auc_binary(s, y, policy);
                report.per_label_auc[static_cast<std::size_t>(j)] = value;
                report.roc_points.push_back(roc_curve(s, y));
                sum += value;
                ++counted;
            } catch (const SingleClass&) {
                report.roc_points.emplace_back();
            }
        }
        if (counted == 0) throw SingleClass("no label has both populations");
        report.auc = sum / counted;
    }
    return report;
}

void save_report(const MetricsReport& report, const std::filesystem::path& path,
                 const std::string& config_hash) {
    nlohmann::ordered_json doc;
    if (!config_hash.empty()) doc["config_hash"] = config_hash;
    doc["task"] = to_string(report.task);
    doc["n"] = report.n_samples;
    doc["k"] = report.num_labels;
    doc["tie_policy"] = to_string(report.tie_policy);
    doc["acc"] = report.acc;
    doc["auc"] = report.auc;
    doc["per_label_auc"] = nlohmann::ordered_json::array();
    for (const auto& value : report.per_label_auc) {
        if (value)
            doc["per_label_auc"].push_back(*value);
        else
            doc["per_label_auc"].push_back(nullptr);
    }
    doc["roc_points"] = nlohmann::ordered_json::array();
    for (const auto& curve : report.roc_points) {
        nlohmann::ordered_json points = nlohmann::ordered_json::array();
        for (const auto& [fpr, tpr] : curve) points.push_back({fpr, tpr});
        doc["roc_points"].push_back(std::move(points));
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw MissingPath("cannot open " + path.string() + " for writing");
    out << doc.dump(2) << "\n";
}

}  // namespace fvenc
