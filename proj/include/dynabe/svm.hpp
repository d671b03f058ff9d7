#pragma once

#include "dynabe/predictor.hpp"

#include <Eigen/Dense>
#include <vector>

namespace dynabe::learners {

struct SvmParams {
    double C = 1.0;
    double gamma = 0.1;  // RBF width: k(a, b) = exp(-gamma * |a - b|^2)
    double kkt_tol = 1e-3;
    long max_steps = 2000000;  // takeStep successes before giving up
};

class SvmRbfModel final : public Predictor {
public:
    SvmRbfModel() = default;
    SvmRbfModel(Eigen::MatrixXd support_vectors, Eigen::VectorXd sv_coef, double bias,
                SvmParams params, Eigen::VectorXd train_alphas, double kkt_residual,
                double dual_objective)
        : support_vectors_(std::move(support_vectors)),
          sv_coef_(std::move(sv_coef)),
          bias_(bias),
          params_(params),
          train_alphas_(std::move(train_alphas)),
          kkt_residual_(kkt_residual),
          dual_objective_(dual_objective) {}

    ModelKind kind() const override { return ModelKind::kSvmRbf; }
    /// Signed margin f(x) = sum_i alpha_i s_i k(x_i, x) + b with s_i in {-1,+1}.
    double score(const Eigen::VectorXd& x) const override;
    double threshold() const override { return 0.0; }
    double score01(const Eigen::VectorXd& x) const override { return sigmoid(score(x)); }
    nlohmann::json to_json() const override;

    const Eigen::MatrixXd& support_vectors() const { return support_vectors_; }
    const Eigen::VectorXd& sv_coef() const { return sv_coef_; }
    double bias() const { return bias_; }
    const SvmParams& params() const { return params_; }
    /// Dual variables for every training row, in row order.
    const Eigen::VectorXd& train_alphas() const { return train_alphas_; }
    /// Largest KKT violation over the training set at termination.
    double kkt_residual() const { return kkt_residual_; }
    double dual_objective() const { return dual_objective_; }

private:
    Eigen::MatrixXd support_vectors_;
    Eigen::VectorXd sv_coef_;  // alpha_i * s_i per support vector
    double bias_ = 0.0;
    SvmParams params_;
    Eigen::VectorXd train_alphas_;
    double kkt_residual_ = 0.0;
    double dual_objective_ = 0.0;
};

SvmRbfModel fit_svm_rbf(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        const SvmParams& params);

}  // namespace dynabe::learners
