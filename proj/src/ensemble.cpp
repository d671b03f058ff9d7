#include "dynabe/ensemble.hpp"

#include "dynabe/errors.hpp"
#include "dynabe/frame.hpp"
#include "dynabe/io.hpp"
#include "dynabe/rng.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace dynabe::ensemble {

namespace {

using learners::Hyperparams;
using learners::ModelKind;

constexpr ModelKind kBaseOrder[5] = {
    ModelKind::kElasticLinear,
    ModelKind::kElasticLogistic,
    ModelKind::kSvmRbf,
    ModelKind::kGbt,
    ModelKind::kRotationForest,
};

template <typename IndexVec>
Eigen::MatrixXd take_matrix_rows(const Eigen::MatrixXd& X, const IndexVec& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

template <typename IndexVec>
Eigen::VectorXd take_vector_rows(const Eigen::VectorXd& y, const IndexVec& rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

}  // namespace

std::string to_string(Stacker stacker) {
    switch (stacker) {
        case Stacker::kLogistic: return "LOGISTIC";
        case Stacker::kXgboost: return "XGBOOST";
        case Stacker::kRotForest: return "ROTFOREST";
        case Stacker::kAveraged: return "AVERAGED";
    }
    throw ParamError("unknown stacker");
}

std::vector<BaseSpec> standard_base_specs(
    const std::vector<std::pair<ModelKind, Hyperparams>>& tuned) {
    std::vector<BaseSpec> specs;
    specs.reserve(tuned.size());
    for (const auto& [kind, hp] : tuned) {
        specs.push_back({learners::to_string(kind),
                         [kind, hp](const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                    std::uint64_t seed) {
                             return learners::fit_model(kind, X, y, hp, seed);
                         }});
    }
    return specs;
}

std::vector<std::pair<ModelKind, Hyperparams>> tune_base_models(
    const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::uint64_t seed,
    std::vector<std::pair<std::string, learners::TuneResult>>* log) {
    std::vector<std::pair<ModelKind, Hyperparams>> tuned;
    for (std::size_t m = 0; m < 5; ++m) {
        const ModelKind kind = kBaseOrder[m];
        auto spec = learners::default_search_spec(kind);
        auto result = learners::tune(kind, X, y, spec, derive_seed(seed, "tune_base", m));
        if (log != nullptr) {
            log->emplace_back(learners::to_string(kind), result);
        }
        tuned.emplace_back(kind, std::move(result.best));
    }
    return tuned;
}

void StackingAudit::verify_no_leakage() const {
    for (std::size_t i = 0; i < producing_fold.size(); ++i) {
        const std::size_t f = producing_fold[i];
        if (f >= folds.size()) {
            throw IntegrityError("row " + std::to_string(i) +
                                 " attributed to nonexistent fold " + std::to_string(f));
        }
        const auto& fold = folds[f];
        const Eigen::Index row = static_cast<Eigen::Index>(i);
        const bool held_out =
            std::find(fold.valid_rows.begin(), fold.valid_rows.end(), row) !=
            fold.valid_rows.end();
        if (!held_out) {
            throw IntegrityError("row " + std::to_string(i) +
                                 " is not in the held-out block of fold " + std::to_string(f));
        }
        const bool trained_on =
            std::find(fold.train_rows.begin(), fold.train_rows.end(), row) !=
            fold.train_rows.end();
        if (trained_on) {
            throw IntegrityError("row " + std::to_string(i) +
                                 " appears in the training slice of the fold that scored it");
        }
    }
}

StackResult stack_meta_features(const std::vector<BaseSpec>& bases,
                                const Eigen::MatrixXd& train_X, const Eigen::VectorXd& train_y,
                                const Eigen::MatrixXd& valid_X, std::size_t folds,
                                std::uint64_t seed) {
    if (bases.empty()) {
        throw ParamError("stacking needs at least one base model");
    }
    const std::size_t n = static_cast<std::size_t>(train_X.rows());
    const std::size_t n_bases = bases.size();
    auto fold_plan = make_time_folds(n, folds);

    StackResult result;
    result.train_meta.resize(train_X.rows(), static_cast<Eigen::Index>(n_bases));
    result.valid_meta.resize(valid_X.rows(), static_cast<Eigen::Index>(n_bases));
    result.audit.folds = fold_plan;
    result.audit.producing_fold.assign(n, 0);

    for (std::size_t f = 0; f < fold_plan.size(); ++f) {
        const auto& fold = fold_plan[f];
        Eigen::MatrixXd sub_X = take_matrix_rows(train_X, fold.train_rows);
        Eigen::VectorXd sub_y = take_vector_rows(train_y, fold.train_rows);
        for (std::size_t m = 0; m < n_bases; ++m) {
            learners::PredictorPtr model;
            try {
                model = bases[m].fit(sub_X, sub_y,
                                     derive_seed(seed, "fold_base", f * n_bases + m));
            } catch (const Error& e) {
                throw PipelineError("fold " + std::to_string(f) + ", base model '" +
                                    bases[m].name + "': " + e.what());
            }
            for (Eigen::Index row : fold.valid_rows) {
                result.train_meta(row, static_cast<Eigen::Index>(m)) =
                    model->score01(train_X.row(row));
                result.audit.producing_fold[static_cast<std::size_t>(row)] = f;
            }
        }
    }

    for (std::size_t m = 0; m < n_bases; ++m) {
        learners::PredictorPtr model;
        try {
            model = bases[m].fit(train_X, train_y, derive_seed(seed, "full_base", m));
        } catch (const Error& e) {
            throw PipelineError("full-train fit, base model '" + bases[m].name +
                                "': " + e.what());
        }
        for (Eigen::Index i = 0; i < valid_X.rows(); ++i) {
            result.valid_meta(i, static_cast<Eigen::Index>(m)) = model->score01(valid_X.row(i));
        }
    }
    return result;
}

std::vector<Eigen::VectorXd> fit_stackers(const Eigen::MatrixXd& train_meta,
                                          const Eigen::VectorXd& train_y,
                                          const Eigen::MatrixXd& valid_meta,
                                          const Hyperparams& logistic_hp,
                                          std::uint64_t seed) {
    if (train_meta.cols() != valid_meta.cols()) {
        throw SchemaError("train and validation meta matrices disagree on columns");
    }
    if (!learners::has_both_classes(train_y)) {
        throw DegenerateTargetError("stacker target holds a single class");
    }

    auto logistic = learners::fit_model(ModelKind::kElasticLogistic, train_meta, train_y,
                                        logistic_hp, derive_seed(seed, "stk_logistic"));
    Hyperparams gbt_hp{{"max_depth", 2.0}, {"eta", 0.1}, {"n_rounds", 100.0}};
    auto gbt = learners::fit_model(ModelKind::kGbt, train_meta, train_y, gbt_hp,
                                   derive_seed(seed, "stk_gbt"));
    Hyperparams rot_hp{{"n_trees", 10.0}, {"subset_size", 3.0}};
    auto rot = learners::fit_model(ModelKind::kRotationForest, train_meta, train_y, rot_hp,
                                   derive_seed(seed, "stk_rot"));

    std::vector<Eigen::VectorXd> out(4);
    out[0] = logistic->score01_all(valid_meta);
    out[1] = gbt->score01_all(valid_meta);
    out[2] = rot->score01_all(valid_meta);
    out[3] = (out[0] + out[1] + out[2]) / 3.0;
    return out;
}

std::vector<AgentPredictions> bagged_advisor(
    const AdvisorSpec& advisor, const Eigen::MatrixXd& train_X, const Eigen::VectorXd& train_y,
    const Eigen::MatrixXd& valid_X, const std::vector<Date>& valid_dates,
    const BagParams& params, std::uint64_t seed, const std::vector<BaseSpec>& bases,
    std::vector<std::pair<std::string, learners::TuneResult>>* tune_log) {
    if (params.n_samples < 1) {
        throw ParamError("bagging needs at least one bootstrap sample");
    }
    if (!(params.sample_frac > 0.0) || params.sample_frac > 1.0) {
        throw ParamError("sample_frac must lie in (0, 1]");
    }
    if (static_cast<Eigen::Index>(valid_dates.size()) != valid_X.rows()) {
        throw SchemaError("validation dates and rows disagree");
    }
    if (!learners::has_both_classes(train_y)) {
        throw DegenerateTargetError("advisor '" + advisor.name +
                                    "': training labels hold a single class");
    }

    std::vector<BaseSpec> active_bases = bases;
    if (active_bases.empty()) {
        auto tuned = tune_base_models(train_X, train_y, derive_seed(seed, "tune"), tune_log);
        active_bases = standard_base_specs(tuned);
    }

    // The logistic stacker's penalty is tuned once, on out-of-fold
    // meta-features of the full training set, and reused across samples.
    auto full_stack = stack_meta_features(active_bases, train_X, train_y, valid_X,
                                          params.folds, derive_seed(seed, "stacker_tune_stack"));
    full_stack.audit.verify_no_leakage();
    auto logistic_spec = learners::default_search_spec(ModelKind::kElasticLogistic);
    auto logistic_tune = learners::tune(ModelKind::kElasticLogistic, full_stack.train_meta,
                                        train_y, logistic_spec,
                                        derive_seed(seed, "stacker_tune"));
    if (tune_log != nullptr) {
        tune_log->emplace_back("logistic_stacker", logistic_tune);
    }
    const Hyperparams logistic_hp = logistic_tune.best;

    const std::size_t n = static_cast<std::size_t>(train_X.rows());
    const std::size_t draw =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(params.sample_frac *
                                                                       static_cast<double>(n))));
    std::vector<Eigen::VectorXd> sums(4, Eigen::VectorXd::Zero(valid_X.rows()));

    for (std::size_t b = 0; b < params.n_samples; ++b) {
        std::vector<std::size_t> rows;
        if (params.bootstrap) {
            Rng rng(derive_seed(seed, "bag", b));
            constexpr int kMaxRetries = 200;
            int attempt = 0;
            for (;; ++attempt) {
                rows.clear();
                rows.reserve(draw);
                for (std::size_t i = 0; i < draw; ++i) {
                    rows.push_back(rng.below(n));
                }
                Eigen::VectorXd sample_y = take_vector_rows(train_y, rows);
                if (learners::has_both_classes(sample_y)) break;
                if (attempt >= kMaxRetries) {
                    throw TrainingError("advisor '" + advisor.name + "', sample " +
                                        std::to_string(b) +
                                        ": could not draw both classes after " +
                                        std::to_string(kMaxRetries + 1) + " attempts");
                }
            }
            // Keep draws in time order so the stacking folds stay contiguous.
            std::sort(rows.begin(), rows.end());
        } else {
            rows.resize(n);
            for (std::size_t i = 0; i < n; ++i) rows[i] = i;
        }

        Eigen::MatrixXd sub_X = take_matrix_rows(train_X, rows);
        Eigen::VectorXd sub_y = take_vector_rows(train_y, rows);
        auto stacked = stack_meta_features(active_bases, sub_X, sub_y, valid_X, params.folds,
                                           derive_seed(seed, "bag_stack", b));
        stacked.audit.verify_no_leakage();
        auto scores = fit_stackers(stacked.train_meta, sub_y, stacked.valid_meta, logistic_hp,
                                   derive_seed(seed, "bag_stackers", b));
        for (std::size_t s = 0; s < 4; ++s) {
            sums[s] += scores[s];
        }
    }

    std::vector<AgentPredictions> agents;
    agents.reserve(4);
    for (std::size_t s = 0; s < 4; ++s) {
        AgentPredictions agent;
        agent.advisor = advisor.name;
        agent.stacker = kStackerOrder[s];
        agent.dates = valid_dates;
        agent.scores = sums[s] / static_cast<double>(params.n_samples);
        agent.classes.resize(valid_dates.size());
        for (Eigen::Index i = 0; i < agent.scores.size(); ++i) {
            agent.classes[static_cast<std::size_t>(i)] = agent.scores(i) >= 0.5 ? 1 : 0;
        }
        agents.push_back(std::move(agent));
    }
    return agents;
}

AgentMatrix agent_matrix_from_predictions(const std::vector<AgentPredictions>& agents) {
    if (agents.empty()) {
        throw ParamError("agent matrix needs at least one agent");
    }
    const auto& dates = agents.front().dates;
    AgentMatrix matrix;
    matrix.dates = dates;
    matrix.scores.resize(static_cast<Eigen::Index>(dates.size()),
                         static_cast<Eigen::Index>(agents.size()));
    matrix.classes.resize(matrix.scores.rows(), matrix.scores.cols());
    for (std::size_t a = 0; a < agents.size(); ++a) {
        const auto& agent = agents[a];
        if (agent.dates != dates) {
            throw SchemaError("agent '" + agent.advisor + "/" + to_string(agent.stacker) +
                              "' covers different dates than the first agent");
        }
        if (agent.scores.size() != static_cast<Eigen::Index>(dates.size()) ||
            agent.classes.size() != dates.size()) {
            throw SchemaError("agent '" + agent.advisor + "' has inconsistent lengths");
        }
        matrix.agent_names.push_back(agent.advisor + "/" + to_string(agent.stacker));
        for (std::size_t t = 0; t < dates.size(); ++t) {
            const Eigen::Index i = static_cast<Eigen::Index>(t);
            const Eigen::Index j = static_cast<Eigen::Index>(a);
            matrix.scores(i, j) = agent.scores(i);
            matrix.classes(i, j) = agent.classes[t];
        }
    }
    return matrix;
}

AgentMatrix build_all_advisors(
    const std::vector<AdvisorData>& advisors, const Eigen::VectorXd& train_y,
    const std::vector<Date>& valid_dates, const BagParams& params, std::uint64_t seed,
    std::vector<std::pair<std::string, learners::TuneResult>>* tune_log) {
    if (advisors.empty()) {
        throw ParamError("need at least one advisor");
    }
    std::vector<AgentPredictions> all;
    for (std::size_t i = 0; i < advisors.size(); ++i) {
        const auto& advisor = advisors[i];
        std::vector<std::pair<std::string, learners::TuneResult>> local_log;
        std::vector<AgentPredictions> agents;
        try {
            agents = bagged_advisor(advisor.spec, advisor.train_X, train_y, advisor.valid_X,
                                    valid_dates, params, derive_seed(seed, "advisor", i), {},
                                    tune_log != nullptr ? &local_log : nullptr);
        } catch (const Error& e) {
            throw PipelineError("advisor '" + advisor.spec.name + "': " + e.what());
        }
        if (tune_log != nullptr) {
            for (auto& [name, result] : local_log) {
                tune_log->emplace_back(advisor.spec.name + "/" + name, std::move(result));
            }
        }
        for (auto& agent : agents) {
            all.push_back(std::move(agent));
        }
    }
    return agent_matrix_from_predictions(all);
}

void write_agent_matrix_csv(const AgentMatrix& matrix, const std::string& path) {
    std::vector<std::string> header{"date"};
    for (const auto& name : matrix.agent_names) header.push_back("score:" + name);
    for (const auto& name : matrix.agent_names) header.push_back("class:" + name);
    std::vector<std::vector<std::string>> rows;
    rows.reserve(matrix.dates.size());
    for (std::size_t t = 0; t < matrix.dates.size(); ++t) {
        std::vector<std::string> row{matrix.dates[t].to_string()};
        const Eigen::Index i = static_cast<Eigen::Index>(t);
        for (Eigen::Index j = 0; j < matrix.scores.cols(); ++j) {
            row.push_back(format_double(matrix.scores(i, j)));
        }
        for (Eigen::Index j = 0; j < matrix.classes.cols(); ++j) {
            row.push_back(std::to_string(matrix.classes(i, j)));
        }
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

AgentMatrix read_agent_matrix_csv(const std::string& path) {
    FeatureFrame frame = read_feature_csv(path);
    frame.validate();
    std::vector<std::string> names;
    for (const auto& col : frame.names) {
        if (col.rfind("score:", 0) == 0) {
            names.push_back(col.substr(6));
        }
    }
    if (names.empty()) {
        throw SchemaError(path + ": no score columns found");
    }
    AgentMatrix matrix;
    matrix.dates = frame.dates;
    matrix.agent_names = names;
    const Eigen::Index t_len = static_cast<Eigen::Index>(frame.rows());
    matrix.scores.resize(t_len, static_cast<Eigen::Index>(names.size()));
    matrix.classes.resize(t_len, static_cast<Eigen::Index>(names.size()));
    for (std::size_t j = 0; j < names.size(); ++j) {
        const auto& score_col = frame.column("score:" + names[j]);
        if (!frame.has_column("class:" + names[j])) {
            throw SchemaError(path + ": missing class column for agent '" + names[j] + "'");
        }
        const auto& class_col = frame.column("class:" + names[j]);
        for (Eigen::Index i = 0; i < t_len; ++i) {
            matrix.scores(i, static_cast<Eigen::Index>(j)) = score_col[static_cast<std::size_t>(i)];
            const double c = class_col[static_cast<std::size_t>(i)];
            if (c != 0.0 && c != 1.0) {
                throw SchemaError(path + ": class entries must be 0 or 1");
            }
            matrix.classes(i, static_cast<Eigen::Index>(j)) = static_cast<int>(c);
        }
    }
    return matrix;
}

}  // namespace dynabe::ensemble
