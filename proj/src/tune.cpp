#include "dynabe/tune.hpp"

#include "dynabe/elastic_net.hpp"
#include "dynabe/errors.hpp"
#include "dynabe/folds.hpp"
#include "dynabe/gbt.hpp"
#include "dynabe/io.hpp"
#include "dynabe/mlp.hpp"
#include "dynabe/rng.hpp"
#include "dynabe/rotation_forest.hpp"
#include "dynabe/svm.hpp"
#include "dynabe/tree.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace dynabe::learners {

namespace {

double get_or(const Hyperparams& hp, const std::string& name, double fallback) {
    const auto it = hp.find(name);
    return it == hp.end() ? fallback : it->second;
}

int get_int(const Hyperparams& hp, const std::string& name, int fallback) {
    return static_cast<int>(std::llround(get_or(hp, name, fallback)));
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<Eigen::Index>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
    }
    return out;
}

Eigen::VectorXd take_rows(const Eigen::VectorXd& y, const std::vector<Eigen::Index>& rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = y(rows[i]);
    }
    return out;
}

double fold_score(const Predictor& model, const Eigen::MatrixXd& Xv, const Eigen::VectorXd& yv,
                  TuneObjective objective) {
    if (objective == TuneObjective::kMisclassification) {
        return misclassification(model, Xv, yv);
    }
    double acc = 0.0;
    for (Eigen::Index i = 0; i < Xv.rows(); ++i) {
        const double err = model.score(Xv.row(i)) - yv(i);
        acc += err * err;
    }
    return acc / static_cast<double>(Xv.rows());
}

std::vector<Hyperparams> grid_candidates(const HyperparamSearchSpec& spec) {
    std::vector<Hyperparams> out;
    out.emplace_back();
    for (const auto& axis : spec.grid) {
        if (axis.values.empty()) {
            throw ParamError("grid axis '" + axis.name + "' has no values");
        }
        std::vector<Hyperparams> next;
        next.reserve(out.size() * axis.values.size());
        for (const auto& partial : out) {
            for (double v : axis.values) {
                Hyperparams hp = partial;
                hp[axis.name] = v;
                next.push_back(std::move(hp));
            }
        }
        out = std::move(next);
    }
    return out;
}

std::vector<Hyperparams> random_candidates(const HyperparamSearchSpec& spec, std::uint64_t seed) {
    if (spec.budget < 1) {
        throw ParamError("random hyperparameter search needs a positive budget");
    }
    Rng rng(derive_seed(seed, "tune_random"));
    std::vector<Hyperparams> out;
    out.reserve(spec.budget);
    for (std::size_t i = 0; i < spec.budget; ++i) {
        Hyperparams hp;
        for (const auto& axis : spec.random_axes) {
            if (!(axis.hi >= axis.lo)) {
                throw ParamError("random axis '" + axis.name + "' has hi < lo");
            }
            double v;
            if (axis.integer) {
                const auto span = static_cast<std::uint64_t>(axis.hi - axis.lo) + 1;
                v = axis.lo + static_cast<double>(rng.below(span));
            } else if (axis.log_scale) {
                if (!(axis.lo > 0.0)) {
                    throw ParamError("log-scale axis '" + axis.name + "' needs lo > 0");
                }
                v = std::exp(rng.uniform(std::log(axis.lo), std::log(axis.hi)));
            } else {
                v = rng.uniform(axis.lo, axis.hi);
            }
            hp[axis.name] = v;
        }
        out.push_back(std::move(hp));
    }
    return out;
}

}  // namespace

PredictorPtr fit_model(ModelKind kind, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const Hyperparams& hp, std::uint64_t seed) {
    switch (kind) {
        case ModelKind::kElasticLinear: {
            ElasticNetParams p;
            p.alpha = get_or(hp, "alpha", p.alpha);
            p.lambda = get_or(hp, "lambda", p.lambda);
            return std::make_unique<ElasticLinearModel>(fit_elastic_linear(X, y, p));
        }
        case ModelKind::kElasticLogistic: {
            ElasticNetParams p;
            p.alpha = get_or(hp, "alpha", p.alpha);
            p.lambda = get_or(hp, "lambda", p.lambda);
            return std::make_unique<ElasticLogisticModel>(fit_elastic_logistic(X, y, p));
        }
        case ModelKind::kSvmRbf: {
            SvmParams p;
            p.C = get_or(hp, "C", p.C);
            p.gamma = get_or(hp, "gamma", p.gamma);
            return std::make_unique<SvmRbfModel>(fit_svm_rbf(X, y, p));
        }
        case ModelKind::kGbt: {
            GbtParams p;
            p.n_rounds = get_int(hp, "n_rounds", p.n_rounds);
            p.eta = get_or(hp, "eta", p.eta);
            p.max_depth = get_int(hp, "max_depth", p.max_depth);
            p.min_child_weight = get_or(hp, "min_child_weight", p.min_child_weight);
            p.subsample = get_or(hp, "subsample", p.subsample);
            p.colsample_bytree = get_or(hp, "colsample_bytree", p.colsample_bytree);
            p.l1_alpha = get_or(hp, "l1_alpha", p.l1_alpha);
            p.l2_lambda = get_or(hp, "l2_lambda", p.l2_lambda);
            p.min_split_gain = get_or(hp, "min_split_gain", p.min_split_gain);
            p.seed = seed;
            return std::make_unique<GbtModel>(fit_gbt(X, y, p));
        }
        case ModelKind::kRotationForest: {
            RotationForestParams p;
            p.n_trees = get_int(hp, "n_trees", p.n_trees);
            p.subset_size = get_int(hp, "subset_size", p.subset_size);
            p.seed = seed;
            return std::make_unique<RotationForestModel>(fit_rotation_forest(X, y, p));
        }
        case ModelKind::kRandomForest: {
            RandomForestParams p;
            p.n_trees = get_int(hp, "n_trees", p.n_trees);
            p.mtry = get_int(hp, "mtry", p.mtry);
            p.seed = seed;
            return std::make_unique<RandomForestModel>(fit_random_forest(X, y, p));
        }
        case ModelKind::kMlp: {
            MlpParams p;
            p.hidden = get_int(hp, "hidden", p.hidden);
            p.learning_rate = get_or(hp, "learning_rate", p.learning_rate);
            p.momentum = get_or(hp, "momentum", p.momentum);
            p.epochs = get_int(hp, "epochs", p.epochs);
            p.plateau_patience = get_int(hp, "plateau_patience", p.plateau_patience);
            p.seed = seed;
            return std::make_unique<MlpModel>(fit_mlp(X, y, p));
        }
        case ModelKind::kCart: {
            CartParams p;
            p.max_depth = get_int(hp, "max_depth", p.max_depth);
            p.min_leaf = get_int(hp, "min_leaf", p.min_leaf);
            p.mtry = get_int(hp, "mtry", p.mtry);
            Rng rng(derive_seed(seed, "cart_fit"));
            return std::make_unique<CartModel>(fit_cart(X, y, p, rng));
        }
    }
    throw ParamError("unknown model kind for fit_model");
}

TuneResult tune(ModelKind kind, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                const HyperparamSearchSpec& spec, std::uint64_t seed) {
    if (!spec.grid.empty() && !spec.random_axes.empty()) {
        throw ParamError("search spec mixes grid and random axes");
    }
    std::vector<Hyperparams> candidates;
    if (!spec.grid.empty()) {
        candidates = grid_candidates(spec);
    } else if (!spec.random_axes.empty()) {
        candidates = random_candidates(spec, seed);
    } else {
        candidates.emplace_back();  // the fixed configuration alone
    }
    for (auto& hp : candidates) {
        for (const auto& [name, value] : spec.fixed) {
            hp.emplace(name, value);  // explicit axes win over fixed values
        }
    }

    const bool single = candidates.size() == 1;
    std::vector<Fold> folds;
    if (!single) {
        folds = make_time_folds(static_cast<std::size_t>(X.rows()), spec.cv_folds);
    }

    TuneResult result;
    result.best_score = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        TuneCandidate entry;
        entry.params = candidates[c];
        if (single) {
            entry.score = 0.0;  // nothing to compare against
        } else {
            double total = 0.0;
            const std::uint64_t cand_seed =
                derive_seed(seed, "tune_candidate", static_cast<std::uint64_t>(c));
            try {
                for (std::size_t f = 0; f < folds.size(); ++f) {
                    const auto model = fit_model(
                        kind, take_rows(X, folds[f].train_rows), take_rows(y, folds[f].train_rows),
                        entry.params, derive_seed(cand_seed, "fold", static_cast<std::uint64_t>(f)));
                    ++result.fits;
                    total += fold_score(*model, take_rows(X, folds[f].valid_rows),
                                        take_rows(y, folds[f].valid_rows), spec.objective);
                }
                entry.score = total / static_cast<double>(folds.size());
            } catch (const Error&) {
                entry.failed = true;
                entry.score = std::numeric_limits<double>::infinity();
            }
        }
        if (!entry.failed && entry.score < result.best_score) {
            result.best_score = entry.score;
            result.best = entry.params;
        }
        result.evaluated.push_back(std::move(entry));
    }

    if (result.best.empty() && !candidates.empty() && !candidates.front().empty()) {
        bool all_failed = true;
        for (const auto& e : result.evaluated) {
            if (!e.failed) all_failed = false;
        }
        if (all_failed) {
            throw TrainingError("every hyperparameter candidate failed cross-validation");
        }
    }
    if (single) {
        result.best = candidates.front();
        result.best_score = 0.0;
    }
    return result;
}

HyperparamSearchSpec default_search_spec(ModelKind kind) {
    HyperparamSearchSpec spec;
    switch (kind) {
        case ModelKind::kElasticLinear:
        case ModelKind::kElasticLogistic: {
            GridAxis alpha{"alpha", {}};
            for (int i = 0; i <= 10; ++i) alpha.values.push_back(i / 10.0);
            spec.grid.push_back(std::move(alpha));
            spec.grid.push_back({"lambda", {0.001, 0.01, 0.1, 1.0, 10.0}});
            spec.cv_folds = 10;
            spec.objective = TuneObjective::kMse;
            return spec;
        }
        case ModelKind::kSvmRbf: {
            spec.grid.push_back({"C", {0.1, 1.0, 10.0, 100.0}});
            spec.grid.push_back({"gamma", {0.01, 0.1, 1.0, 10.0}});
            spec.cv_folds = 5;
            spec.objective = TuneObjective::kMisclassification;
            return spec;
        }
        case ModelKind::kGbt: {
            spec.random_axes = {
                {"eta", 0.01, 0.3, true, false},
                {"max_depth", 2, 8, false, true},
                {"min_child_weight", 1.0, 10.0, false, false},
                {"subsample", 0.5, 1.0, false, false},
                {"colsample_bytree", 0.5, 1.0, false, false},
                {"l1_alpha", 0.0, 5.0, false, false},
                {"l2_lambda", 0.0, 5.0, false, false},
                {"min_split_gain", 0.0, 5.0, false, false},
            };
            spec.budget = 60;
            spec.fixed["n_rounds"] = 100;
            spec.cv_folds = 5;
            spec.objective = TuneObjective::kMisclassification;
            return spec;
        }
        case ModelKind::kRotationForest: {
            spec.fixed["n_trees"] = 10;
            spec.fixed["subset_size"] = 3;
            spec.cv_folds = 5;
            return spec;
        }
        case ModelKind::kRandomForest: {
            spec.fixed["n_trees"] = 200;
            spec.fixed["mtry"] = -1;
            spec.cv_folds = 5;
            return spec;
        }
        case ModelKind::kMlp: {
            spec.grid.push_back({"learning_rate", {0.01, 0.05, 0.1}});
            spec.grid.push_back({"momentum", {0.5, 0.9}});
            spec.fixed["hidden"] = 20;
            spec.fixed["epochs"] = 200;
            spec.fixed["plateau_patience"] = 10;
            spec.cv_folds = 5;
            spec.objective = TuneObjective::kMisclassification;
            return spec;
        }
        case ModelKind::kCart: {
            spec.cv_folds = 5;
            return spec;
        }
    }
    throw ParamError("unknown model kind for default_search_spec");
}

std::vector<std::string> tuning_report_header() {
    return {"model", "candidate", "score", "failed", "params"};
}

std::vector<std::vector<std::string>> tuning_report_rows(
    const std::vector<std::pair<std::string, TuneResult>>& results) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& [model, result] : results) {
        for (std::size_t c = 0; c < result.evaluated.size(); ++c) {
            const auto& entry = result.evaluated[c];
            std::ostringstream params;
            bool first = true;
            for (const auto& [name, value] : entry.params) {
                if (!first) params << ';';
                params << name << '=' << dynabe::format_double(value);
                first = false;
            }
            rows.push_back({model, std::to_string(c), dynabe::format_double(entry.score),
                            entry.failed ? "1" : "0", params.str()});
        }
    }
    return rows;
}

}  // namespace dynabe::learners
