#pragma once

#include "dynabe/date.hpp"
#include "dynabe/folds.hpp"
#include "dynabe/tune.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dynabe::ensemble {

/// The four stacking methods applied on top of the base-model meta-features.
enum class Stacker {
    kLogistic,
    kXgboost,
    kRotForest,
    kAveraged,
};

std::string to_string(Stacker stacker);

/// The fixed order in which stacker columns appear in every agent matrix.
inline constexpr Stacker kStackerOrder[4] = {
    Stacker::kLogistic,
    Stacker::kXgboost,
    Stacker::kRotForest,
    Stacker::kAveraged,
};

/// A named feature pool together with the subset that survived selection.
struct AdvisorSpec {
    std::string name;
    std::vector<std::string> feature_pool;
    std::vector<std::string> selected_features;
};

/// One agent's validation-period output stream.
struct AgentPredictions {
    std::string advisor;
    Stacker stacker = Stacker::kLogistic;
    std::vector<Date> dates;
    Eigen::VectorXd scores;      // in [0,1]
    std::vector<int> classes;    // scores >= 0.5
};

/// Fits one base model; injectable so tests can swap in probe models.
using ModelFitter = std::function<learners::PredictorPtr(
    const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::uint64_t seed)>;

/// A base-model slot in the stacking ensemble: a display name plus the
/// fitter that produces a trained predictor from (X, y, seed).
struct BaseSpec {
    std::string name;
    ModelFitter fit;
};

/// Builds the five standard base-model specs with hyperparameters fixed to
/// the given per-model values (tuned once upstream).
std::vector<BaseSpec> standard_base_specs(
    const std::vector<std::pair<learners::ModelKind, learners::Hyperparams>>& tuned);

/// Tunes each of the five standard base models on (X, y) with its stock
/// search space and returns the (kind, best hyperparams) list in ensemble
/// order. `log` collects per-model tune results when non-null.
std::vector<std::pair<learners::ModelKind, learners::Hyperparams>> tune_base_models(
    const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::uint64_t seed,
    std::vector<std::pair<std::string, learners::TuneResult>>* log = nullptr);

/// Records which fold produced each out-of-fold meta row so the no-leakage
/// property is checkable after the fact.
struct StackingAudit {
    std::vector<Fold> folds;
    std::vector<std::size_t> producing_fold;  // per train row

    /// Throws IntegrityError if any train row's meta-features were produced
    /// by a fold model whose training slice contains that row.
    void verify_no_leakage() const;
};

struct StackResult {
    Eigen::MatrixXd train_meta;  // n_train x n_bases, out-of-fold scores
    Eigen::MatrixXd valid_meta;  // n_valid x n_bases, full-train fit scores
    StackingAudit audit;
};

/// Out-of-fold meta-features over contiguous time folds. Each fold's base
/// models are re-fit on the remaining rows and score the held-out block;
/// the validation meta-features come from fits on the full training set.
StackResult stack_meta_features(const std::vector<BaseSpec>& bases,
                                const Eigen::MatrixXd& train_X, const Eigen::VectorXd& train_y,
                                const Eigen::MatrixXd& valid_X, std::size_t folds,
                                std::uint64_t seed);

/// Validation scores of the four stackers fit on the out-of-fold meta
/// matrix, indexed by kStackerOrder. The averaged stacker is the exact
/// elementwise mean of the other three. `logistic_hp` carries the logistic
/// stacker's elastic-net settings, tuned upstream.
std::vector<Eigen::VectorXd> fit_stackers(const Eigen::MatrixXd& train_meta,
                                          const Eigen::VectorXd& train_y,
                                          const Eigen::MatrixXd& valid_meta,
                                          const learners::Hyperparams& logistic_hp,
                                          std::uint64_t seed);

struct BagParams {
    std::size_t n_samples = 10;   // bootstrap samples (B)
    double sample_frac = 0.8;     // sample size as a fraction of n_train
    bool bootstrap = true;        // false keeps the full train set as-is
    std::size_t folds = 5;        // stacking CV folds inside each sample
};

/// Full per-advisor pipeline on an already feature-pruned design matrix:
/// tune the bases once on the full train set, then for each bootstrap
/// sample re-fit, stack, and average the per-stacker validation scores over
/// the samples. Returns one AgentPredictions per stacker in kStackerOrder.
/// `bases` overrides the standard tuned bases when non-empty (test hook).
std::vector<AgentPredictions> bagged_advisor(const AdvisorSpec& advisor,
                                             const Eigen::MatrixXd& train_X,
                                             const Eigen::VectorXd& train_y,
                                             const Eigen::MatrixXd& valid_X,
                                             const std::vector<Date>& valid_dates,
                                             const BagParams& params, std::uint64_t seed,
                                             const std::vector<BaseSpec>& bases = {},
                                             std::vector<std::pair<std::string, learners::TuneResult>>* tune_log = nullptr);

/// Validation-period streams of every agent, advisor-major then stacker
/// order; column name "advisor/stacker".
struct AgentMatrix {
    std::vector<Date> dates;
    std::vector<std::string> agent_names;
    Eigen::MatrixXd scores;   // T x N in [0,1]
    Eigen::MatrixXi classes;  // T x N in {0,1}
};

/// Per-advisor inputs for the full build: the advisor spec plus its train
/// and validation design matrices restricted to selected features.
struct AdvisorData {
    AdvisorSpec spec;
    Eigen::MatrixXd train_X;
    Eigen::MatrixXd valid_X;
};

/// Runs bagged_advisor for every advisor and assembles the agent matrix.
/// Column order: advisors in input order x stackers in kStackerOrder.
AgentMatrix build_all_advisors(const std::vector<AdvisorData>& advisors,
                               const Eigen::VectorXd& train_y,
                               const std::vector<Date>& valid_dates,
                               const BagParams& params, std::uint64_t seed,
                               std::vector<std::pair<std::string, learners::TuneResult>>* tune_log = nullptr);

AgentMatrix agent_matrix_from_predictions(const std::vector<AgentPredictions>& agents);

/// CSV with a date column, then one score column and one class column per
/// agent ("score:advisor/stacker", "class:advisor/stacker").
void write_agent_matrix_csv(const AgentMatrix& matrix, const std::string& path);
AgentMatrix read_agent_matrix_csv(const std::string& path);

}  // namespace dynabe::ensemble
