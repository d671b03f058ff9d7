#pragma once

#include "dynabe/predictor.hpp"

#include <Eigen/Dense>
#include <vector>

namespace dynabe::learners {

/// Penalty follows the convention used throughout this code base:
///   penalty(beta) = lambda * (alpha * ||beta||_2^2 + (1 - alpha) * ||beta||_1)
/// so alpha = 1 is pure ridge and alpha = 0 is pure lasso. The intercept is
/// never penalized.
struct ElasticNetParams {
    double alpha = 0.5;
    double lambda = 1.0;
    bool fit_intercept = true;
    double tol = 1e-10;
    int max_sweeps = 100000;
};

class ElasticLinearModel final : public Predictor {
public:
    ElasticLinearModel() = default;
    ElasticLinearModel(Eigen::VectorXd beta, double intercept, ElasticNetParams params,
                       std::vector<double> objective_history)
        : beta_(std::move(beta)),
          intercept_(intercept),
          params_(params),
          objective_history_(std::move(objective_history)) {}

    ModelKind kind() const override { return ModelKind::kElasticLinear; }
    double score(const Eigen::VectorXd& x) const override { return beta_.dot(x) + intercept_; }
    double threshold() const override { return 0.5; }
    nlohmann::json to_json() const override;

    const Eigen::VectorXd& beta() const { return beta_; }
    double intercept() const { return intercept_; }
    const ElasticNetParams& params() const { return params_; }
    /// Objective value after each coordinate-descent sweep; non-increasing.
    const std::vector<double>& objective_history() const { return objective_history_; }

private:
    Eigen::VectorXd beta_;
    double intercept_ = 0.0;
    ElasticNetParams params_;
    std::vector<double> objective_history_;
};

class ElasticLogisticModel final : public Predictor {
public:
    ElasticLogisticModel() = default;
    ElasticLogisticModel(Eigen::VectorXd beta, double intercept, ElasticNetParams params,
                         std::vector<double> objective_history)
        : beta_(std::move(beta)),
          intercept_(intercept),
          params_(params),
          objective_history_(std::move(objective_history)) {}

    ModelKind kind() const override { return ModelKind::kElasticLogistic; }
    double score(const Eigen::VectorXd& x) const override {
        return sigmoid(beta_.dot(x) + intercept_);
    }
    double threshold() const override { return 0.5; }
    double score01(const Eigen::VectorXd& x) const override { return score(x); }
    nlohmann::json to_json() const override;

    const Eigen::VectorXd& beta() const { return beta_; }
    double intercept() const { return intercept_; }
    const ElasticNetParams& params() const { return params_; }
    const std::vector<double>& objective_history() const { return objective_history_; }

private:
    Eigen::VectorXd beta_;
    double intercept_ = 0.0;
    ElasticNetParams params_;
    std::vector<double> objective_history_;
};

/// Squared loss plus penalty evaluated at (beta, intercept).
double elastic_linear_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& beta, double intercept,
                                const ElasticNetParams& params);

/// Penalized negative log-likelihood at (beta, intercept).
double elastic_logistic_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& beta, double intercept,
                                  const ElasticNetParams& params);

/// Smooth part (log-likelihood plus L2 term) of the logistic objective and its
/// analytic gradient with respect to (beta, intercept). The L1 term is left
/// out so the function stays differentiable everywhere.
struct LossGradient {
    double loss = 0.0;
    Eigen::VectorXd grad_beta;
    double grad_intercept = 0.0;
};
LossGradient logistic_smooth_loss_grad(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& beta, double intercept,
                                       const ElasticNetParams& params);

ElasticLinearModel fit_elastic_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                      const ElasticNetParams& params);

ElasticLogisticModel fit_elastic_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                          const ElasticNetParams& params);

}  // namespace dynabe::learners
