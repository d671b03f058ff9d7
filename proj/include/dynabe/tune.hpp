#pragma once

#include "dynabe/predictor.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dynabe::learners {

using Hyperparams = std::map<std::string, double>;

enum class TuneObjective {
    kMse,                // mean squared error of the native score against y
    kMisclassification,  // fraction of wrong hard labels
};

struct GridAxis {
    std::string name;
    std::vector<double> values;
};

struct RandomAxis {
    std::string name;
    double lo = 0.0;
    double hi = 1.0;
    bool log_scale = false;
    bool integer = false;
};

struct HyperparamSearchSpec {
    std::vector<GridAxis> grid;         // cartesian product when non-empty
    std::vector<RandomAxis> random_axes;  // otherwise budget random draws
    std::size_t budget = 0;
    std::size_t cv_folds = 10;
    TuneObjective objective = TuneObjective::kMse;
    Hyperparams fixed;  // merged into every candidate
};

struct TuneCandidate {
    Hyperparams params;
    double score = 0.0;
    bool failed = false;  // a fold fit threw; candidate is out of the running
};

struct TuneResult {
    Hyperparams best;
    double best_score = 0.0;
    std::vector<TuneCandidate> evaluated;
    std::size_t fits = 0;  // model fits actually performed
};

/// Builds a predictor of the given kind from a flat hyperparameter map;
/// unmentioned knobs keep their defaults.
PredictorPtr fit_model(ModelKind kind, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const Hyperparams& hp, std::uint64_t seed);

/// Cross-validated search over the spec's candidates with contiguous
/// time-order folds. Ties keep the first candidate encountered. Candidates
/// whose fold fits throw are logged as failed and skipped.
TuneResult tune(ModelKind kind, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                const HyperparamSearchSpec& spec, std::uint64_t seed);

/// The stock search spaces used by the pipeline for each base model.
HyperparamSearchSpec default_search_spec(ModelKind kind);

/// Flattens tune results into rows for the tuning report
/// (model, candidate, score, failed, params).
std::vector<std::vector<std::string>> tuning_report_rows(
    const std::vector<std::pair<std::string, TuneResult>>& results);
std::vector<std::string> tuning_report_header();

}  // namespace dynabe::learners
