#pragma once

#include "dynabe/predictor.hpp"
#include "dynabe/tree.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace dynabe::learners {

struct RotationForestParams {
    int n_trees = 10;
    int subset_size = 3;
    std::uint64_t seed = 0;
};

struct FeatureRotation {
    std::vector<std::vector<int>> groups;     // original column indices per subset
    std::vector<Eigen::VectorXd> means;       // per-group column means
    std::vector<Eigen::MatrixXd> components;  // per-group PCA loadings, all kept
};

/// Rodriguez-style rotation forest: each tree sees the features rotated by
/// per-subset full PCA (fit on centered training columns), then grows an
/// unpruned CART on the rotated space. Votes are averaged leaf probabilities.
class RotationForestModel final : public Predictor {
public:
    RotationForestModel() = default;
    RotationForestModel(std::vector<FeatureRotation> rotations, std::vector<CartModel> trees,
                        RotationForestParams params)
        : rotations_(std::move(rotations)), trees_(std::move(trees)), params_(params) {}

    ModelKind kind() const override { return ModelKind::kRotationForest; }
    double score(const Eigen::VectorXd& x) const override;
    double threshold() const override { return 0.5; }
    nlohmann::json to_json() const override;

    Eigen::VectorXd rotate(const FeatureRotation& rot, const Eigen::VectorXd& x) const;
    const std::vector<FeatureRotation>& rotations() const { return rotations_; }
    const std::vector<CartModel>& trees() const { return trees_; }
    const RotationForestParams& params() const { return params_; }

private:
    std::vector<FeatureRotation> rotations_;
    std::vector<CartModel> trees_;
    RotationForestParams params_;
};

RotationForestModel fit_rotation_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                        const RotationForestParams& params);

}  // namespace dynabe::learners
