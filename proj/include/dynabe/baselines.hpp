#pragma once

#include "dynabe/tune.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace dynabe::baselines {

struct BaselineRow {
    std::string model;
    double error = 0.0;  // validation misclassification, burn-in excluded
};

struct ComparisonReport {
    std::vector<BaselineRow> rows;  // three static baselines, then the online row
    std::string note;
};

/// Tunes SVM, 3-layer MLP and random forest on the training slice (CV grid
/// search), fits each on the full train set and scores the validation days
/// after the burn-in, mirroring how the online error excludes its first f
/// days. `online_error` is appended as the final row. Every model sees the
/// same rows and features.
ComparisonReport run_baselines(
    const Eigen::MatrixXd& train_X, const Eigen::VectorXd& train_y,
    const Eigen::MatrixXd& valid_X, const std::vector<int>& valid_truth,
    std::size_t burnin_f, double online_error, std::uint64_t seed,
    std::vector<std::pair<std::string, learners::TuneResult>>* tune_log = nullptr);

void write_comparison_csv(const ComparisonReport& report, const std::string& path);

}  // namespace dynabe::baselines
