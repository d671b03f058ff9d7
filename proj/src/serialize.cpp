#include "dynabe/elastic_net.hpp"
#include "dynabe/errors.hpp"
#include "dynabe/gbt.hpp"
#include "dynabe/io.hpp"
#include "dynabe/mlp.hpp"
#include "dynabe/rotation_forest.hpp"
#include "dynabe/svm.hpp"
#include "dynabe/tree.hpp"

#include <json.hpp>

namespace dynabe::learners {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(std::move(row));
    }
    return out;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index cols_hint = 0) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : cols_hint;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
        }
    }
    return m;
}

json nodes_to_json(const std::vector<TreeNode>& nodes) {
    json out = json::array();
    for (const auto& n : nodes) {
        out.push_back(json::array({n.is_leaf, n.feature, n.threshold, n.left, n.right, n.prob1}));
    }
    return out;
}

std::vector<TreeNode> nodes_from_json(const json& j) {
    std::vector<TreeNode> nodes;
    nodes.reserve(j.size());
    for (const auto& row : j) {
        TreeNode n;
        n.is_leaf = row[0].get<bool>();
        n.feature = row[1].get<int>();
        n.threshold = row[2].get<double>();
        n.left = row[3].get<int>();
        n.right = row[4].get<int>();
        n.prob1 = row[5].get<double>();
        nodes.push_back(n);
    }
    return nodes;
}

json envelope(ModelKind kind) {
    return json{{"format_version", kFormatVersion}, {"kind", to_string(kind)}};
}

void check_envelope(const json& j) {
    if (!j.contains("format_version") || !j.contains("kind")) {
        throw SchemaError("model document lacks format_version/kind");
    }
    if (j.at("format_version").get<int>() != kFormatVersion) {
        throw SchemaError("unsupported model format_version");
    }
}

json elastic_params_to_json(const ElasticNetParams& p) {
    return json{{"alpha", p.alpha},
                {"lambda", p.lambda},
                {"fit_intercept", p.fit_intercept},
                {"tol", p.tol},
                {"max_sweeps", p.max_sweeps}};
}

ElasticNetParams elastic_params_from_json(const json& j) {
    ElasticNetParams p;
    p.alpha = j.at("alpha").get<double>();
    p.lambda = j.at("lambda").get<double>();
    p.fit_intercept = j.at("fit_intercept").get<bool>();
    p.tol = j.at("tol").get<double>();
    p.max_sweeps = j.at("max_sweeps").get<int>();
    return p;
}

}  // namespace

nlohmann::json ElasticLinearModel::to_json() const {
    json j = envelope(kind());
    j["params"] = elastic_params_to_json(params_);
    j["beta"] = vector_to_json(beta_);
    j["intercept"] = intercept_;
    return j;
}

nlohmann::json ElasticLogisticModel::to_json() const {
    json j = envelope(kind());
    j["params"] = elastic_params_to_json(params_);
    j["beta"] = vector_to_json(beta_);
    j["intercept"] = intercept_;
    return j;
}

nlohmann::json SvmRbfModel::to_json() const {
    json j = envelope(kind());
    j["params"] = json{{"C", params_.C},
                       {"gamma", params_.gamma},
                       {"kkt_tol", params_.kkt_tol},
                       {"max_steps", params_.max_steps}};
    j["support_vectors"] = matrix_to_json(support_vectors_);
    j["sv_coef"] = vector_to_json(sv_coef_);
    j["bias"] = bias_;
    j["kkt_residual"] = kkt_residual_;
    j["dual_objective"] = dual_objective_;
    return j;
}

nlohmann::json CartModel::to_json() const {
    json j = envelope(kind());
    j["params"] = json{{"max_depth", params_.max_depth},
                       {"min_leaf", params_.min_leaf},
                       {"mtry", params_.mtry}};
    j["nodes"] = nodes_to_json(nodes_);
    return j;
}

nlohmann::json RandomForestModel::to_json() const {
    json j = envelope(kind());
    j["params"] = json{{"n_trees", params_.n_trees},
                       {"mtry", params_.mtry},
                       {"bootstrap", params_.bootstrap},
                       {"seed", params_.seed}};
    json trees = json::array();
    for (const auto& tree : trees_) trees.push_back(nodes_to_json(tree.nodes()));
    j["trees"] = std::move(trees);
    return j;
}

nlohmann::json GbtModel::to_json() const {
    json j = envelope(kind());
    j["params"] = json{{"n_rounds", params_.n_rounds},
                       {"eta", params_.eta},
                       {"max_depth", params_.max_depth},
                       {"min_child_weight", params_.min_child_weight},
                       {"subsample", params_.subsample},
                       {"colsample_bytree", params_.colsample_bytree},
                       {"l1_alpha", params_.l1_alpha},
                       {"l2_lambda", params_.l2_lambda},
                       {"min_split_gain", params_.min_split_gain},
                       {"seed", params_.seed}};
    json trees = json::array();
    for (const auto& nodes : trees_) trees.push_back(nodes_to_json(nodes));
    j["trees"] = std::move(trees);
    return j;
}

nlohmann::json RotationForestModel::to_json() const {
    json j = envelope(kind());
    j["params"] = json{{"n_trees", params_.n_trees},
                       {"subset_size", params_.subset_size},
                       {"seed", params_.seed}};
    json rotations = json::array();
    for (const auto& rot : rotations_) {
        json groups = json::array();
        for (const auto& g : rot.groups) groups.push_back(g);
        json means = json::array();
        for (const auto& m : rot.means) means.push_back(vector_to_json(m));
        json comps = json::array();
        for (const auto& c : rot.components) comps.push_back(matrix_to_json(c));
        rotations.push_back(json{{"groups", std::move(groups)},
                                 {"means", std::move(means)},
                                 {"components", std::move(comps)}});
    }
    j["rotations"] = std::move(rotations);
    json trees = json::array();
    for (const auto& tree : trees_) trees.push_back(nodes_to_json(tree.nodes()));
    j["trees"] = std::move(trees);
    return j;
}

nlohmann::json MlpModel::to_json() const {
    json j = envelope(kind());
    j["params"] = json{{"hidden", params_.hidden},
                       {"learning_rate", params_.learning_rate},
                       {"momentum", params_.momentum},
                       {"epochs", params_.epochs},
                       {"plateau_patience", params_.plateau_patience},
                       {"seed", params_.seed}};
    j["w1"] = matrix_to_json(w1_);
    j["b1"] = vector_to_json(b1_);
    j["w2"] = vector_to_json(w2_);
    j["b2"] = b2_;
    return j;
}

PredictorPtr predictor_from_json(const nlohmann::json& j) {
    check_envelope(j);
    const auto kind = model_kind_from_string(j.at("kind").get<std::string>());
    switch (kind) {
        case ModelKind::kElasticLinear: {
            return std::make_unique<ElasticLinearModel>(
                vector_from_json(j.at("beta")), j.at("intercept").get<double>(),
                elastic_params_from_json(j.at("params")), std::vector<double>{});
        }
        case ModelKind::kElasticLogistic: {
            return std::make_unique<ElasticLogisticModel>(
                vector_from_json(j.at("beta")), j.at("intercept").get<double>(),
                elastic_params_from_json(j.at("params")), std::vector<double>{});
        }
        case ModelKind::kSvmRbf: {
            const auto& p = j.at("params");
            SvmParams params;
            params.C = p.at("C").get<double>();
            params.gamma = p.at("gamma").get<double>();
            params.kkt_tol = p.at("kkt_tol").get<double>();
            params.max_steps = p.at("max_steps").get<long>();
            return std::make_unique<SvmRbfModel>(
                matrix_from_json(j.at("support_vectors")), vector_from_json(j.at("sv_coef")),
                j.at("bias").get<double>(), params, Eigen::VectorXd{},
                j.at("kkt_residual").get<double>(), j.at("dual_objective").get<double>());
        }
        case ModelKind::kCart: {
            const auto& p = j.at("params");
            CartParams params;
            params.max_depth = p.at("max_depth").get<int>();
            params.min_leaf = p.at("min_leaf").get<int>();
            params.mtry = p.at("mtry").get<int>();
            return std::make_unique<CartModel>(nodes_from_json(j.at("nodes")), params);
        }
        case ModelKind::kRandomForest: {
            const auto& p = j.at("params");
            RandomForestParams params;
            params.n_trees = p.at("n_trees").get<int>();
            params.mtry = p.at("mtry").get<int>();
            params.bootstrap = p.at("bootstrap").get<bool>();
            params.seed = p.at("seed").get<std::uint64_t>();
            std::vector<CartModel> trees;
            CartParams tp;
            tp.mtry = params.mtry;
            for (const auto& t : j.at("trees")) trees.emplace_back(nodes_from_json(t), tp);
            return std::make_unique<RandomForestModel>(
                std::move(trees), std::vector<std::vector<Eigen::Index>>{}, params);
        }
        case ModelKind::kGbt: {
            const auto& p = j.at("params");
            GbtParams params;
            params.n_rounds = p.at("n_rounds").get<int>();
            params.eta = p.at("eta").get<double>();
            params.max_depth = p.at("max_depth").get<int>();
            params.min_child_weight = p.at("min_child_weight").get<double>();
            params.subsample = p.at("subsample").get<double>();
            params.colsample_bytree = p.at("colsample_bytree").get<double>();
            params.l1_alpha = p.at("l1_alpha").get<double>();
            params.l2_lambda = p.at("l2_lambda").get<double>();
            params.min_split_gain = p.at("min_split_gain").get<double>();
            params.seed = p.at("seed").get<std::uint64_t>();
            std::vector<std::vector<TreeNode>> trees;
            for (const auto& t : j.at("trees")) trees.push_back(nodes_from_json(t));
            return std::make_unique<GbtModel>(std::move(trees), params, std::vector<double>{});
        }
        case ModelKind::kRotationForest: {
            const auto& p = j.at("params");
            RotationForestParams params;
            params.n_trees = p.at("n_trees").get<int>();
            params.subset_size = p.at("subset_size").get<int>();
            params.seed = p.at("seed").get<std::uint64_t>();
            std::vector<FeatureRotation> rotations;
            for (const auto& r : j.at("rotations")) {
                FeatureRotation rot;
                for (const auto& g : r.at("groups")) {
                    rot.groups.push_back(g.get<std::vector<int>>());
                }
                for (const auto& m : r.at("means")) rot.means.push_back(vector_from_json(m));
                for (const auto& c : r.at("components")) {
                    rot.components.push_back(matrix_from_json(c));
                }
                rotations.push_back(std::move(rot));
            }
            std::vector<CartModel> trees;
            for (const auto& t : j.at("trees")) {
                trees.emplace_back(nodes_from_json(t), CartParams{});
            }
            return std::make_unique<RotationForestModel>(std::move(rotations), std::move(trees),
                                                         params);
        }
        case ModelKind::kMlp: {
            const auto& p = j.at("params");
            MlpParams params;
            params.hidden = p.at("hidden").get<int>();
            params.learning_rate = p.at("learning_rate").get<double>();
            params.momentum = p.at("momentum").get<double>();
            params.epochs = p.at("epochs").get<int>();
            params.plateau_patience = p.at("plateau_patience").get<int>();
            params.seed = p.at("seed").get<std::uint64_t>();
            return std::make_unique<MlpModel>(matrix_from_json(j.at("w1")),
                                              vector_from_json(j.at("b1")),
                                              vector_from_json(j.at("w2")),
                                              j.at("b2").get<double>(), params,
                                              std::vector<double>{});
        }
    }
    throw SchemaError("unhandled model kind in document");
}

void save_predictor(const Predictor& model, const std::string& path) {
    dynabe::write_text_file(path, model.to_json().dump(2) + "\n");
}

PredictorPtr load_predictor(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(dynabe::read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("model file is not valid structured text: " + std::string(e.what()));
    }
    return predictor_from_json(j);
}

}  // namespace dynabe::learners
