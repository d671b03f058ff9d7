#pragma once

#include "dynabe/date.hpp"
#include "dynabe/ensemble.hpp"
#include "dynabe/frame.hpp"

#include <Eigen/Dense>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace dynabe::online {

struct OnlineParams {
    std::size_t f = 5;     // update frequency in days
    double gamma = 0.8;    // decay rate
    double lambda = 0.0;   // diversity bias

    /// Throws ParamError on f < 1, gamma outside [0,1] or lambda < 0.
    void validate() const;
};

/// State after one update epoch: the weights in force from `start` on and
/// the decayed per-agent scores they were normalized from.
struct WeightEpoch {
    Date start;
    Eigen::VectorXd weights;
    Eigen::VectorXd scores;
};

/// Epoch 0 is the initial uniform state; each later epoch follows one
/// f-day window.
struct WeightHistory {
    std::vector<WeightEpoch> epochs;
};

/// One window's worth of reweighting: per-day diversity-biased increments
/// for correct agents, decay of the old scores, then normalization (uniform
/// when no agent scored). Returns (weights, updated scores).
std::pair<Eigen::VectorXd, Eigen::VectorXd> update_weights(
    const Eigen::MatrixXi& window_classes, const std::vector<int>& window_truth,
    const Eigen::VectorXd& old_scores, double gamma, double lambda);

struct OnlineResult {
    std::vector<int> predictions;  // one per agent-matrix date
    WeightHistory history;
};

/// Runs the full online pass: uniform initial weights, weighted vote of
/// agent classes per day (ties to 1), weights refreshed after every full
/// f-day window, leftover days predicted with the last weights.
OnlineResult online_update(const ensemble::AgentMatrix& agents, const TrendLabels& truth,
                           const OnlineParams& params);

/// Misclassification over days f+1..T only; the first f days are burn-in
/// predicted by uninformed uniform weights.
double evaluate_excluding_burnin(const std::vector<int>& predictions,
                                 const std::vector<int>& truth, std::size_t f);

/// Collapses each epoch's weights to one total per advisor. `grouping` maps
/// agent name to advisor name and must cover every agent.
std::vector<std::pair<Date, std::map<std::string, double>>> weight_history_by_advisor(
    const WeightHistory& history, const std::vector<std::string>& agent_names,
    const std::map<std::string, std::string>& grouping);

/// Running post-burn-in accuracy of the online predictions after each day
/// f+1..T, in day order.
std::vector<double> accuracy_history(const ensemble::AgentMatrix& agents,
                                     const TrendLabels& truth, const OnlineParams& params);

struct GridCell {
    std::size_t f = 0;
    double lambda = 0.0;
    double error = 0.0;
};

/// Exhaustive (f, lambda) sweep at fixed gamma, sorted by error ascending
/// (ties by f then lambda). Diagnostic only; nothing is selected from it.
std::vector<GridCell> grid_search_online(const ensemble::AgentMatrix& agents,
                                         const TrendLabels& truth,
                                         const std::vector<std::size_t>& f_values,
                                         const std::vector<double>& lambda_values,
                                         double gamma);

/// CSV exports: per-epoch weights ("epoch,start_date,<agent...>"), the
/// day-indexed accuracy curve, and the grid table.
void write_weight_history_csv(const WeightHistory& history,
                              const std::vector<std::string>& agent_names,
                              const std::string& path);
void write_accuracy_history_csv(const std::vector<Date>& dates, std::size_t f,
                                const std::vector<double>& curve, const std::string& path);
void write_grid_csv(const std::vector<GridCell>& grid, double gamma, const std::string& path);

}  // namespace dynabe::online
