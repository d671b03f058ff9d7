#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace dynabe::selection {

enum class RankMethod { kR2, kReliefF, kRfImportance, kCombined };

std::string to_string(RankMethod method);

struct RankingEntry {
    std::string feature;
    std::size_t rank = 0;  // 1 = most important
    double score = 0.0;
};

struct FeatureRanking {
    RankMethod method = RankMethod::kR2;
    std::vector<RankingEntry> entries;  // sorted by rank ascending

    std::size_t rank_of(const std::string& feature) const;
    double score_of(const std::string& feature) const;
};

/// Keeps features whose univariate slope p-value is at most the threshold.
/// Survivors are returned in input order.
std::vector<std::size_t> pvalue_filter(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                       double threshold = 0.5);

/// Ranks by descending univariate R^2 against the 0/1 labels.
FeatureRanking r2_rank(const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                       const Eigen::VectorXd& y);

/// ReliefF weights with k nearest hits/misses per visited instance, Manhattan
/// distance, per-feature range-normalized diffs. n_iterations = 0 visits every
/// row once; otherwise rows are visited in order, cycling past the end.
FeatureRanking relieff_rank(const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                            const Eigen::VectorXd& y, std::size_t k_neighbors = 10,
                            std::size_t n_iterations = 0);

/// Out-of-bag permutation importance: mean over trees of the OOB accuracy
/// drop when one feature's OOB values are shuffled.
FeatureRanking rf_importance_rank(const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                                  const Eigen::VectorXd& y, int n_trees = 200,
                                  std::uint64_t seed = 0);

/// Mean of the three per-method ranks, re-ranked ascending (score = mean rank,
/// so for the combined ranking a LOWER score is better).
FeatureRanking combine_rankings(const std::vector<FeatureRanking>& rankings);

/// Top ceil(keep_fraction * n) features of the combined ranking, best first.
std::vector<std::string> select_top(const FeatureRanking& combined, double keep_fraction = 0.2);

std::vector<std::string> combine_and_select(const std::vector<FeatureRanking>& rankings,
                                            double keep_fraction = 0.2);

struct SelectionResult {
    std::vector<std::string> filtered;  // survivors of the p-value filter
    std::vector<double> p_values;       // aligned with `filtered`
    FeatureRanking r2;
    FeatureRanking relieff;
    FeatureRanking rf_importance;
    FeatureRanking combined;
    std::vector<std::string> selected;
};

/// Full hybrid selection: filter, three rankers, fusion, top cut.
SelectionResult run_hybrid_selection(const Eigen::MatrixXd& X,
                                     const std::vector<std::string>& names,
                                     const Eigen::VectorXd& y, double keep_fraction,
                                     std::uint64_t seed, double p_threshold = 0.5,
                                     std::size_t k_neighbors = 10, int n_trees = 200);

std::vector<std::string> selection_report_header();
std::vector<std::vector<std::string>> selection_report_rows(const SelectionResult& result);

}  // namespace dynabe::selection
