#pragma once

#include "dynabe/predictor.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace dynabe::learners {

struct MlpParams {
    int hidden = 20;
    double learning_rate = 0.1;
    double momentum = 0.9;
    int epochs = 200;
    int plateau_patience = 0;  // >0 stops after that many epochs without
                               // improving the best loss by at least 1e-6
    std::uint64_t seed = 0;
};

/// One sigmoid hidden layer, sigmoid output, cross-entropy loss, trained by
/// per-sample SGD with classical momentum over a shuffled order each epoch.
class MlpModel final : public Predictor {
public:
    MlpModel() = default;
    MlpModel(Eigen::MatrixXd w1, Eigen::VectorXd b1, Eigen::VectorXd w2, double b2,
             MlpParams params, std::vector<double> loss_history)
        : w1_(std::move(w1)),
          b1_(std::move(b1)),
          w2_(std::move(w2)),
          b2_(b2),
          params_(params),
          loss_history_(std::move(loss_history)) {}

    ModelKind kind() const override { return ModelKind::kMlp; }
    double score(const Eigen::VectorXd& x) const override;
    double threshold() const override { return 0.5; }
    double score01(const Eigen::VectorXd& x) const override { return score(x); }
    nlohmann::json to_json() const override;

    const Eigen::MatrixXd& w1() const { return w1_; }
    const Eigen::VectorXd& b1() const { return b1_; }
    const Eigen::VectorXd& w2() const { return w2_; }
    double b2() const { return b2_; }
    const MlpParams& params() const { return params_; }
    /// Mean cross-entropy over the training set after each epoch, epoch 0
    /// (the untouched initialization) first.
    const std::vector<double>& loss_history() const { return loss_history_; }

private:
    Eigen::MatrixXd w1_;  // hidden x input
    Eigen::VectorXd b1_;
    Eigen::VectorXd w2_;
    double b2_ = 0.0;
    MlpParams params_;
    std::vector<double> loss_history_;
};

struct MlpGradients {
    double loss = 0.0;
    Eigen::MatrixXd w1;
    Eigen::VectorXd b1;
    Eigen::VectorXd w2;
    double b2 = 0.0;
};

/// Batch mean cross-entropy and its analytic gradients at the model's
/// current weights.
MlpGradients mlp_loss_and_gradients(const MlpModel& model, const Eigen::MatrixXd& X,
                                    const Eigen::VectorXd& y);

MlpModel fit_mlp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const MlpParams& params);

}  // namespace dynabe::learners
