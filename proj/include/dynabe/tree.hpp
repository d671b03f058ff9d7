#pragma once

#include "dynabe/predictor.hpp"
#include "dynabe/rng.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace dynabe::learners {

struct TreeNode {
    bool is_leaf = true;
    int feature = -1;
    double threshold = 0.0;
    int left = -1;   // index into node array
    int right = -1;
    double prob1 = 0.0;  // class-1 fraction of training rows at the node
};

struct CartParams {
    int max_depth = -1;  // -1 grows until pure or unsplittable
    int min_leaf = 1;
    int mtry = -1;  // features tried per split; -1 means all
};

/// Unpruned binary classification tree split on Gini impurity. Candidate
/// thresholds are midpoints between adjacent distinct sorted values; ties in
/// gain resolve to the lowest feature index, then the lowest threshold.
class CartModel final : public Predictor {
public:
    CartModel() = default;
    CartModel(std::vector<TreeNode> nodes, CartParams params)
        : nodes_(std::move(nodes)), params_(params) {}

    ModelKind kind() const override { return ModelKind::kCart; }
    double score(const Eigen::VectorXd& x) const override;
    double threshold() const override { return 0.5; }
    nlohmann::json to_json() const override;

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    const CartParams& params() const { return params_; }

private:
    std::vector<TreeNode> nodes_;
    CartParams params_;
};

/// rows selects the training subset (may repeat entries for bootstrap use).
/// rng drives the per-split feature subsample when mtry < number of columns.
CartModel fit_cart(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const std::vector<Eigen::Index>& rows, const CartParams& params,
                   Rng& rng);
CartModel fit_cart(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const CartParams& params, Rng& rng);

struct RandomForestParams {
    int n_trees = 200;
    int mtry = -1;  // -1 means floor(sqrt(d)), at least 1
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

class RandomForestModel final : public Predictor {
public:
    RandomForestModel() = default;
    RandomForestModel(std::vector<CartModel> trees, std::vector<std::vector<Eigen::Index>> oob_rows,
                      RandomForestParams params)
        : trees_(std::move(trees)), oob_rows_(std::move(oob_rows)), params_(params) {}

    ModelKind kind() const override { return ModelKind::kRandomForest; }
    /// Fraction of trees voting class 1; a tie classifies as 1.
    double score(const Eigen::VectorXd& x) const override;
    double threshold() const override { return 0.5; }
    nlohmann::json to_json() const override;

    const std::vector<CartModel>& trees() const { return trees_; }
    /// Training rows each tree did not see (empty sets when bootstrap is off).
    const std::vector<std::vector<Eigen::Index>>& oob_rows() const { return oob_rows_; }
    const RandomForestParams& params() const { return params_; }

private:
    std::vector<CartModel> trees_;
    std::vector<std::vector<Eigen::Index>> oob_rows_;
    RandomForestParams params_;
};

RandomForestModel fit_random_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                    const RandomForestParams& params);

}  // namespace dynabe::learners
