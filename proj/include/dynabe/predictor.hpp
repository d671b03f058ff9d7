#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <json.hpp>
#include <memory>
#include <string>
#include <vector>

namespace dynabe::learners {

enum class ModelKind {
    kElasticLinear,
    kElasticLogistic,
    kSvmRbf,
    kGbt,
    kRotationForest,
    kRandomForest,
    kMlp,
    kCart,
};

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

inline double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// A fitted classifier. score() is the model's native output (a margin for
/// the SVM, a raw regression value for the elastic-net linear model, a
/// probability otherwise); classify() thresholds it at threshold().
/// score01() maps the native score onto a probability-like [0,1] scale and
/// agrees with classify() at 0.5 -- stacking and agent streams consume that.
class Predictor {
public:
    virtual ~Predictor() = default;

    virtual ModelKind kind() const = 0;
    virtual double score(const Eigen::VectorXd& x) const = 0;
    virtual double threshold() const { return 0.5; }

    int classify(const Eigen::VectorXd& x) const {
        return score(x) >= threshold() ? 1 : 0;
    }

    virtual double score01(const Eigen::VectorXd& x) const {
        return std::clamp(score(x), 0.0, 1.0);
    }

    Eigen::VectorXd score01_all(const Eigen::MatrixXd& X) const {
        Eigen::VectorXd out(X.rows());
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            out(i) = score01(X.row(i));
        }
        return out;
    }

    std::vector<int> classify_all(const Eigen::MatrixXd& X) const {
        std::vector<int> out(static_cast<std::size_t>(X.rows()));
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            out[static_cast<std::size_t>(i)] = classify(X.row(i));
        }
        return out;
    }

    /// Versioned structured-text serialization; save/load round-trips scores
    /// exactly (shortest-round-trip doubles).
    virtual nlohmann::json to_json() const = 0;
};

using PredictorPtr = std::unique_ptr<Predictor>;

PredictorPtr predictor_from_json(const nlohmann::json& j);
void save_predictor(const Predictor& model, const std::string& path);
PredictorPtr load_predictor(const std::string& path);

/// Fraction of rows where classify() disagrees with y (y entries 0/1).
double misclassification(const Predictor& model, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& y);

void check_finite(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);
bool has_both_classes(const Eigen::VectorXd& y);

}  // namespace dynabe::learners
