#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "fvenc/linalg.hpp"
#include "fvenc/manifest.hpp"

namespace fvenc {

// `paper` counts only strictly ordered (negative, positive) score pairs;
// `half` credits ties with 0.5, matching the usual rank-based AUC.
enum class TiePolicy { half, paper };

std::string to_string(TiePolicy policy);
TiePolicy tie_policy_from_string(const std::string& name);

// Mean over samples of the mean over label columns of exact matches.
// Label layout follows the manifest convention for the task.
double accuracy(const std::vector<std::vector<int>>& truth,
                const std::vector<std::vector<int>>& predicted, Task task);

// Probability that a positive outscores a negative. O(n log n) via sorting
// with grouped ties; integer pair counts keep it exact.
double auc_binary(const std::vector<double>& scores, const std::vector<int>& labels,
                  TiePolicy policy = TiePolicy::half);

struct OvrAuc {
    double macro = 0.0;
    // one entry per class; empty when the class is missing from the split
    std::vector<std::optional<double>> per_class;
};

// One-vs-rest: class c positive, everything else negative; macro averages
// the classes that have both populations.
OvrAuc auc_multiclass_ovr(const Matrix& scores, const std::vector<int>& labels,
                          TiePolicy policy = TiePolicy::half);

// Operating points swept over every distinct score, threshold descending.
// Starts at (0,0), ends at (1,1); trapezoidal area equals auc_binary(half).
std::vector<std::pair<double, double>> roc_curve(const std::vector<double>& scores,
                                                 const std::vector<int>& labels);

struct MetricsReport {
    Task task = Task::binary;
    int n_samples = 0;
    int num_labels = 0;
    TiePolicy tie_policy = TiePolicy::half;
    double acc = 0.0;
    double auc = 0.0;
    std::vector<std::optional<double>> per_label_auc;
    std::vector<std::vector<std::pair<double, double>>> roc_points;  // per label/class
};

// Predictions from logits: argmax for softmax tasks (ties to the lowest
// index), sigmoid >= 0.5 per label for multilabel.
std::vector<std::vector<int>> predict_labels(const Matrix& logits, Task task);

// Probability scores from logits: softmax columns for binary/multiclass,
// sigmoids for multilabel.
Matrix predict_scores(const Matrix& logits, Task task);

MetricsReport evaluate(const Matrix& logits, const std::vector<std::vector<int>>& truth,
                       Task task, int num_labels, TiePolicy policy = TiePolicy::half);

void save_report(const MetricsReport& report, const std::filesystem::path& path,
                 const std::string& config_hash = {});

}  // namespace fvenc
