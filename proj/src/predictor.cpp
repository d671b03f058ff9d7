#include "dynabe/predictor.hpp"

#include "dynabe/errors.hpp"

#include <cmath>

namespace dynabe::learners {

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::kElasticLinear: return "elastic_linear";
        case ModelKind::kElasticLogistic: return "elastic_logistic";
        case ModelKind::kSvmRbf: return "svm_rbf";
        case ModelKind::kGbt: return "gbt";
        case ModelKind::kRotationForest: return "rotation_forest";
        case ModelKind::kRandomForest: return "random_forest";
        case ModelKind::kMlp: return "mlp";
        case ModelKind::kCart: return "cart";
    }
    throw ParamError("unknown model kind");
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "elastic_linear") return ModelKind::kElasticLinear;
    if (name == "elastic_logistic") return ModelKind::kElasticLogistic;
    if (name == "svm_rbf") return ModelKind::kSvmRbf;
    if (name == "gbt") return ModelKind::kGbt;
    if (name == "rotation_forest") return ModelKind::kRotationForest;
    if (name == "random_forest") return ModelKind::kRandomForest;
    if (name == "mlp") return ModelKind::kMlp;
    if (name == "cart") return ModelKind::kCart;
    throw ParamError("unknown model kind: " + name);
}

double misclassification(const Predictor& model, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& y) {
    if (X.rows() == 0) {
        throw InsufficientDataError("misclassification needs at least one row");
    }
    Eigen::Index wrong = 0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const int truth = y(i) > 0.5 ? 1 : 0;
        if (model.classify(X.row(i)) != truth) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(X.rows());
}

void check_finite(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) {
        throw ParamError("design matrix and target lengths differ");
    }
    if (!X.allFinite()) {
        throw DataError("design matrix contains non-finite values");
    }
    if (!y.allFinite()) {
        throw DataError("target contains non-finite values");
    }
}

bool has_both_classes(const Eigen::VectorXd& y) {
    bool any0 = false, any1 = false;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        (y(i) > 0.5 ? any1 : any0) = true;
    }
    return any0 && any1;
}

}  // namespace dynabe::learners
