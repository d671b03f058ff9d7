#pragma once

#include "dynabe/predictor.hpp"
#include "dynabe/tree.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace dynabe::learners {

struct GbtParams {
    int n_rounds = 100;
    double eta = 0.1;
    int max_depth = 3;
    double min_child_weight = 1.0;  // minimum hessian sum per child
    double subsample = 1.0;         // row fraction drawn per round
    double colsample_bytree = 1.0;  // feature fraction drawn per tree
    double l1_alpha = 0.0;          // L1 on leaf values
    double l2_lambda = 1.0;         // L2 on leaf values
    double min_split_gain = 0.0;    // gamma: gain a split must clear
    std::uint64_t seed = 0;
};

/// Boosted trees on the logistic loss with second-order splits: per round the
/// tree greedily maximizes
///   1/2 * (T(G_L)^2/(H_L+lambda) + T(G_R)^2/(H_R+lambda) - T(G)^2/(H+lambda)) - gamma
/// where T soft-thresholds the gradient sum by l1_alpha, and leaves output
/// -T(G)/(H+lambda) scaled by eta.
class GbtModel final : public Predictor {
public:
    GbtModel() = default;
    GbtModel(std::vector<std::vector<TreeNode>> trees, GbtParams params,
             std::vector<double> train_loss_history)
        : trees_(std::move(trees)),
          params_(params),
          train_loss_history_(std::move(train_loss_history)) {}

    ModelKind kind() const override { return ModelKind::kGbt; }
    double score(const Eigen::VectorXd& x) const override {
        return sigmoid(raw_margin(x));
    }
    double threshold() const override { return 0.5; }
    double score01(const Eigen::VectorXd& x) const override { return score(x); }
    nlohmann::json to_json() const override;

    double raw_margin(const Eigen::VectorXd& x) const;
    const std::vector<std::vector<TreeNode>>& trees() const { return trees_; }
    const GbtParams& params() const { return params_; }
    /// Mean training logistic loss after every boosting round, round 0 first
    /// (the constant 0.5 predictor); non-increasing when subsample is 1.
    const std::vector<double>& train_loss_history() const { return train_loss_history_; }

private:
    std::vector<std::vector<TreeNode>> trees_;  // leaf prob1 holds the leaf weight
    GbtParams params_;
    std::vector<double> train_loss_history_;
};

GbtModel fit_gbt(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GbtParams& params);

}  // namespace dynabe::learners
