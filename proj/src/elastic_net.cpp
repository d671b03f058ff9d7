#include "dynabe/elastic_net.hpp"

#include "dynabe/errors.hpp"

#include <cmath>

namespace dynabe::learners {

namespace {

double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

void validate_params(const ElasticNetParams& p) {
    if (p.alpha < 0.0 || p.alpha > 1.0) {
        throw ParamError("elastic net alpha must lie in [0, 1]");
    }
    if (p.lambda < 0.0 || !std::isfinite(p.lambda)) {
        throw ParamError("elastic net lambda must be finite and non-negative");
    }
    if (p.tol <= 0.0 || p.max_sweeps < 1) {
        throw ParamError("elastic net tol/max_sweeps out of range");
    }
}

double penalty(const Eigen::VectorXd& beta, const ElasticNetParams& p) {
    return p.lambda * (p.alpha * beta.squaredNorm() + (1.0 - p.alpha) * beta.lpNorm<1>());
}

}  // namespace

double elastic_linear_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& beta, double intercept,
                                const ElasticNetParams& params) {
    const Eigen::VectorXd resid =
        y - X * beta - Eigen::VectorXd::Constant(y.size(), intercept);
    return resid.squaredNorm() + penalty(beta, params);
}

double elastic_logistic_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& beta, double intercept,
                                  const ElasticNetParams& params) {
    double nll = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double eta = X.row(i).dot(beta) + intercept;
        // log(1 + exp(eta)) - y*eta, computed overflow-safe
        const double softplus = eta > 0.0 ? eta + std::log1p(std::exp(-eta))
                                          : std::log1p(std::exp(eta));
        nll += softplus - y(i) * eta;
    }
    return nll + penalty(beta, params);
}

LossGradient logistic_smooth_loss_grad(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& beta, double intercept,
                                       const ElasticNetParams& params) {
    LossGradient out;
    out.grad_beta = Eigen::VectorXd::Zero(beta.size());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double eta = X.row(i).dot(beta) + intercept;
        const double softplus = eta > 0.0 ? eta + std::log1p(std::exp(-eta))
                                          : std::log1p(std::exp(eta));
        out.loss += softplus - y(i) * eta;
        const double err = sigmoid(eta) - y(i);
        out.grad_beta += err * X.row(i).transpose();
        out.grad_intercept += err;
    }
    out.loss += params.lambda * params.alpha * beta.squaredNorm();
    out.grad_beta += 2.0 * params.lambda * params.alpha * beta;
    return out;
}

ElasticLinearModel fit_elastic_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                      const ElasticNetParams& params) {
    validate_params(params);
    check_finite(X, y);
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    if (n < 1 || d < 1) {
        throw InsufficientDataError("elastic net needs at least one row and one feature");
    }

    Eigen::VectorXd col_sq(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        col_sq(j) = X.col(j).squaredNorm();
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
    double intercept = params.fit_intercept ? y.mean() : 0.0;
    Eigen::VectorXd resid = y - Eigen::VectorXd::Constant(n, intercept);

    const double l1 = params.lambda * (1.0 - params.alpha);
    const double l2 = params.lambda * params.alpha;

    std::vector<double> history;
    history.push_back(elastic_linear_objective(X, y, beta, intercept, params));

    for (int sweep = 0; sweep < params.max_sweeps; ++sweep) {
        double max_delta = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            if (col_sq(j) == 0.0 && l2 == 0.0) {
                continue;  // constant-zero column, coefficient stays 0
            }
            const double old = beta(j);
            const double rho = X.col(j).dot(resid) + col_sq(j) * old;
            const double updated = soft_threshold(rho, l1 / 2.0) / (col_sq(j) + l2);
            if (updated != old) {
                resid -= (updated - old) * X.col(j);
                beta(j) = updated;
                max_delta = std::max(max_delta, std::abs(updated - old));
            }
        }
        if (params.fit_intercept) {
            const double shift = resid.mean();
            intercept += shift;
            resid.array() -= shift;
            max_delta = std::max(max_delta, std::abs(shift));
        }
        const double obj = elastic_linear_objective(X, y, beta, intercept, params);
        if (obj > history.back() + 1e-9 * (1.0 + std::abs(history.back()))) {
            throw TrainingError("coordinate descent objective increased");
        }
        history.push_back(obj);
        if (max_delta <= params.tol * (1.0 + beta.cwiseAbs().maxCoeff())) {
            break;
        }
    }

    return ElasticLinearModel(std::move(beta), intercept, params, std::move(history));
}

ElasticLogisticModel fit_elastic_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                          const ElasticNetParams& params) {
    validate_params(params);
    check_finite(X, y);
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    if (n < 2 || d < 1) {
        throw InsufficientDataError("logistic elastic net needs at least two rows");
    }
    if (!has_both_classes(y)) {
        throw DegenerateTargetError("logistic elastic net needs both classes in y");
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
    double intercept = 0.0;
    const double l1 = params.lambda * (1.0 - params.alpha);
    const double l2 = params.lambda * params.alpha;

    std::vector<double> history;
    history.push_back(elastic_logistic_objective(X, y, beta, intercept, params));

    constexpr int kOuterMax = 200;
    constexpr int kInnerSweeps = 50;
    for (int outer = 0; outer < kOuterMax; ++outer) {
        // IRLS working response around the current iterate
        Eigen::VectorXd eta = X * beta;
        eta.array() += intercept;
        Eigen::VectorXd w(n), z(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double p = sigmoid(eta(i));
            const double wi = std::max(p * (1.0 - p), 1e-10);
            w(i) = wi;
            z(i) = eta(i) + (y(i) - p) / wi;
        }

        Eigen::VectorXd wcol_sq(d);
        for (Eigen::Index j = 0; j < d; ++j) {
            wcol_sq(j) = X.col(j).array().square().matrix().dot(w);
        }

        Eigen::VectorXd cand = beta;
        double cand_b = params.fit_intercept ? intercept : 0.0;
        Eigen::VectorXd wresid = z - X * cand;
        wresid.array() -= cand_b;
        const double wsum = w.sum();
        for (int inner = 0; inner < kInnerSweeps; ++inner) {
            double inner_delta = 0.0;
            for (Eigen::Index j = 0; j < d; ++j) {
                if (wcol_sq(j) == 0.0 && l2 == 0.0) continue;
                const double old = cand(j);
                const double rho =
                    (X.col(j).array() * w.array() * wresid.array()).sum() + wcol_sq(j) * old;
                const double updated = soft_threshold(rho, l1) / (wcol_sq(j) + 2.0 * l2);
                if (updated != old) {
                    wresid -= (updated - old) * X.col(j);
                    cand(j) = updated;
                    inner_delta = std::max(inner_delta, std::abs(updated - old));
                }
            }
            if (params.fit_intercept) {
                const double shift = w.dot(wresid) / wsum;
                cand_b += shift;
                wresid.array() -= shift;
                inner_delta = std::max(inner_delta, std::abs(shift));
            }
            if (inner_delta <= 1e-12 * (1.0 + cand.cwiseAbs().maxCoeff())) break;
        }

        // Backtrack toward the previous iterate if the Newton step overshot
        double step = 1.0;
        Eigen::VectorXd next = cand;
        double next_b = cand_b;
        double obj = elastic_logistic_objective(X, y, next, next_b, params);
        int halvings = 0;
        while (obj > history.back() && halvings < 30) {
            step *= 0.5;
            next = beta + step * (cand - beta);
            next_b = intercept + step * (cand_b - intercept);
            obj = elastic_logistic_objective(X, y, next, next_b, params);
            ++halvings;
        }
        if (obj > history.back()) {
            break;  // no descent direction left, current iterate is the optimum
        }

        const double move = std::max((next - beta).cwiseAbs().maxCoeff(),
                                     std::abs(next_b - intercept));
        beta = std::move(next);
        intercept = next_b;
        history.push_back(obj);
        if (!std::isfinite(obj)) {
            throw TrainingError("logistic fit diverged to a non-finite objective");
        }
        const double rel_drop = (history[history.size() - 2] - obj) /
                                (1.0 + std::abs(obj));
        if (move <= params.tol || rel_drop <= 1e-13) {
            break;
        }
    }

    return ElasticLogisticModel(std::move(beta), intercept, params, std::move(history));
}

}  // namespace dynabe::learners
