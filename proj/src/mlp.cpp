#include "dynabe/mlp.hpp"

#include "dynabe/errors.hpp"
#include "dynabe/rng.hpp"

#include <cmath>

namespace dynabe::learners {

namespace {

double cross_entropy(double p, double y) {
    constexpr double kEps = 1e-12;
    const double q = std::clamp(p, kEps, 1.0 - kEps);
    return -(y * std::log(q) + (1.0 - y) * std::log1p(-q));
}

struct Net {
    Eigen::MatrixXd w1;
    Eigen::VectorXd b1;
    Eigen::VectorXd w2;
    double b2;

    double forward(const Eigen::VectorXd& x, Eigen::VectorXd* hidden_out = nullptr) const {
        Eigen::VectorXd a1 = w1 * x + b1;
        for (Eigen::Index k = 0; k < a1.size(); ++k) a1(k) = sigmoid(a1(k));
        const double out = sigmoid(w2.dot(a1) + b2);
        if (hidden_out) *hidden_out = std::move(a1);
        return out;
    }
};

double mean_loss(const Net& net, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        acc += cross_entropy(net.forward(X.row(i)), y(i));
    }
    return acc / static_cast<double>(X.rows());
}

}  // namespace

double MlpModel::score(const Eigen::VectorXd& x) const {
    Net net{w1_, b1_, w2_, b2_};
    return net.forward(x);
}

MlpGradients mlp_loss_and_gradients(const MlpModel& model, const Eigen::MatrixXd& X,
                                    const Eigen::VectorXd& y) {
    const Net net{model.w1(), model.b1(), model.w2(), model.b2()};
    MlpGradients out;
    out.w1 = Eigen::MatrixXd::Zero(net.w1.rows(), net.w1.cols());
    out.b1 = Eigen::VectorXd::Zero(net.b1.size());
    out.w2 = Eigen::VectorXd::Zero(net.w2.size());

    const double scale = 1.0 / static_cast<double>(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const Eigen::VectorXd x = X.row(i);
        Eigen::VectorXd a1;
        const double p = net.forward(x, &a1);
        out.loss += scale * cross_entropy(p, y(i));
        const double d2 = scale * (p - y(i));
        out.w2 += d2 * a1;
        out.b2 += d2;
        const Eigen::VectorXd d1 =
            (d2 * net.w2.array() * a1.array() * (1.0 - a1.array())).matrix();
        out.w1 += d1 * x.transpose();
        out.b1 += d1;
    }
    return out;
}

MlpModel fit_mlp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const MlpParams& params) {
    if (params.hidden < 1) throw ParamError("mlp hidden size must be positive");
    if (!(params.learning_rate > 0.0)) throw ParamError("mlp learning_rate must be positive");
    if (params.momentum < 0.0 || params.momentum >= 1.0) {
        throw ParamError("mlp momentum must lie in [0, 1)");
    }
    if (params.epochs < 0) throw ParamError("mlp epochs must be non-negative");
    check_finite(X, y);
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    if (n < 1 || d < 1) {
        throw InsufficientDataError("mlp needs at least one row and one feature");
    }

    Rng rng(derive_seed(params.seed, "mlp_init"));
    const double limit1 = 1.0 / std::sqrt(static_cast<double>(d));
    const double limit2 = 1.0 / std::sqrt(static_cast<double>(params.hidden));
    Net net;
    net.w1.resize(params.hidden, d);
    net.b1 = Eigen::VectorXd::Zero(params.hidden);
    net.w2.resize(params.hidden);
    net.b2 = 0.0;
    for (Eigen::Index r = 0; r < net.w1.rows(); ++r) {
        for (Eigen::Index c = 0; c < net.w1.cols(); ++c) {
            net.w1(r, c) = rng.uniform(-limit1, limit1);
        }
    }
    for (Eigen::Index k = 0; k < net.w2.size(); ++k) {
        net.w2(k) = rng.uniform(-limit2, limit2);
    }

    std::vector<double> history;
    history.push_back(mean_loss(net, X, y));

    Eigen::MatrixXd v_w1 = Eigen::MatrixXd::Zero(params.hidden, d);
    Eigen::VectorXd v_b1 = Eigen::VectorXd::Zero(params.hidden);
    Eigen::VectorXd v_w2 = Eigen::VectorXd::Zero(params.hidden);
    double v_b2 = 0.0;

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

    double best = history.front();
    int stale = 0;
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        Rng epoch_rng(derive_seed(params.seed, "mlp_epoch", static_cast<std::uint64_t>(epoch)));
        epoch_rng.shuffle(order);

        for (Eigen::Index i : order) {
            const Eigen::VectorXd x = X.row(i);
            Eigen::VectorXd a1;
            const double p = net.forward(x, &a1);
            const double d2 = p - y(i);
            const Eigen::VectorXd d1 =
                (d2 * net.w2.array() * a1.array() * (1.0 - a1.array())).matrix();

            v_w2 = params.momentum * v_w2 - params.learning_rate * d2 * a1;
            v_b2 = params.momentum * v_b2 - params.learning_rate * d2;
            v_w1 = params.momentum * v_w1 - params.learning_rate * (d1 * x.transpose());
            v_b1 = params.momentum * v_b1 - params.learning_rate * d1;
            net.w2 += v_w2;
            net.b2 += v_b2;
            net.w1 += v_w1;
            net.b1 += v_b1;
        }

        const double loss = mean_loss(net, X, y);
        if (!std::isfinite(loss) || !net.w1.allFinite()) {
            throw TrainingError("mlp training diverged; try a lower learning rate");
        }
        history.push_back(loss);
        if (params.plateau_patience > 0) {
            if (loss < best - 1e-6) {
                best = loss;
                stale = 0;
            } else if (++stale >= params.plateau_patience) {
                break;
            }
        }
    }

    return MlpModel(std::move(net.w1), std::move(net.b1), std::move(net.w2), net.b2, params,
                    std::move(history));
}

}  // namespace dynabe::learners
