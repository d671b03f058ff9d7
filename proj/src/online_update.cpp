#include "dynabe/online_update.hpp"

#include "dynabe/errors.hpp"
#include "dynabe/io.hpp"

#include <algorithm>
#include <cstddef>

namespace dynabe::online {

void OnlineParams::validate() const {
    if (f < 1) {
        throw ParamError("update frequency f must be at least 1 day");
    }
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw ParamError("decay rate gamma must lie in [0, 1]");
    }
    if (!(lambda >= 0.0)) {
        throw ParamError("diversity bias lambda must be non-negative");
    }
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> update_weights(
    const Eigen::MatrixXi& window_classes, const std::vector<int>& window_truth,
    const Eigen::VectorXd& old_scores, double gamma, double lambda) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw ParamError("decay rate gamma must lie in [0, 1]");
    }
    if (!(lambda >= 0.0)) {
        throw ParamError("diversity bias lambda must be non-negative");
    }
    const Eigen::Index n_agents = window_classes.cols();
    if (static_cast<Eigen::Index>(window_truth.size()) != window_classes.rows()) {
        throw SchemaError("window truth length does not match window rows");
    }
    if (old_scores.size() != n_agents) {
        throw SchemaError("old score vector length does not match agent count");
    }
    if (old_scores.size() > 0 && old_scores.minCoeff() < 0.0) {
        throw ParamError("old scores must be non-negative");
    }

    Eigen::VectorXd window_scores = Eigen::VectorXd::Zero(n_agents);
    for (Eigen::Index day = 0; day < window_classes.rows(); ++day) {
        Eigen::Index n_correct = 0;
        for (Eigen::Index a = 0; a < n_agents; ++a) {
            if (window_classes(day, a) == window_truth[static_cast<std::size_t>(day)]) {
                ++n_correct;
            }
        }
        if (n_correct == 0) continue;
        // Each correct agent gains 1/(1 + lambda * #other correct agents).
        const double increment = 1.0 / (1.0 + lambda * static_cast<double>(n_correct - 1));
        for (Eigen::Index a = 0; a < n_agents; ++a) {
            if (window_classes(day, a) == window_truth[static_cast<std::size_t>(day)]) {
                window_scores(a) += increment;
            }
        }
    }

    Eigen::VectorXd scores = window_scores + gamma * old_scores;
    // Sequential sum; a vectorized reduction reorders additions and the
    // weights feed exact-equality reproducibility checks downstream.
    double total = 0.0;
    for (Eigen::Index a = 0; a < n_agents; ++a) total += scores(a);
    Eigen::VectorXd weights(n_agents);
    if (total == 0.0) {
        weights.setConstant(1.0 / static_cast<double>(n_agents));
    } else {
        weights = scores / total;
    }
    return {weights, scores};
}

namespace {

int vote(const Eigen::MatrixXi& classes, Eigen::Index day, const Eigen::VectorXd& weights) {
    double combined = 0.0;
    for (Eigen::Index a = 0; a < classes.cols(); ++a) {
        if (classes(day, a) == 1) combined += weights(a);
    }
    return combined >= 0.5 ? 1 : 0;
}

void check_alignment(const ensemble::AgentMatrix& agents, const TrendLabels& truth) {
    const std::size_t t_len = agents.dates.size();
    if (agents.agent_names.empty()) {
        throw SchemaError("agent matrix holds no agents");
    }
    if (agents.classes.rows() != static_cast<Eigen::Index>(t_len) ||
        agents.scores.rows() != static_cast<Eigen::Index>(t_len) ||
        agents.classes.cols() != static_cast<Eigen::Index>(agents.agent_names.size()) ||
        agents.scores.cols() != agents.classes.cols()) {
        throw SchemaError("agent matrix shapes are inconsistent");
    }
    if (truth.dates != agents.dates) {
        throw SchemaError("truth labels are not date-aligned with the agent matrix");
    }
    if (truth.labels.size() != t_len) {
        throw SchemaError("truth label count does not match its dates");
    }
}

}  // namespace

OnlineResult online_update(const ensemble::AgentMatrix& agents, const TrendLabels& truth,
                           const OnlineParams& params) {
    params.validate();
    check_alignment(agents, truth);
    const std::size_t t_len = agents.dates.size();
    if (params.f >= t_len) {
        throw ParamError("update frequency f must be smaller than the evaluation span");
    }

    const Eigen::Index n_agents = static_cast<Eigen::Index>(agents.agent_names.size());
    Eigen::VectorXd weights =
        Eigen::VectorXd::Constant(n_agents, 1.0 / static_cast<double>(n_agents));
    Eigen::VectorXd scores = Eigen::VectorXd::Zero(n_agents);

    OnlineResult result;
    result.predictions.assign(t_len, 0);
    result.history.epochs.push_back({agents.dates[0], weights, scores});

    std::size_t i = 0;
    while (i + params.f < t_len) {
        for (std::size_t t = i; t < i + params.f; ++t) {
            result.predictions[t] = vote(agents.classes, static_cast<Eigen::Index>(t), weights);
        }
        Eigen::MatrixXi window = agents.classes.middleRows(
            static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(params.f));
        std::vector<int> window_truth(truth.labels.begin() + static_cast<std::ptrdiff_t>(i),
                                      truth.labels.begin() + static_cast<std::ptrdiff_t>(i + params.f));
        auto [new_weights, new_scores] =
            update_weights(window, window_truth, scores, params.gamma, params.lambda);
        weights = std::move(new_weights);
        scores = std::move(new_scores);
        i += params.f;
        result.history.epochs.push_back({agents.dates[i], weights, scores});
    }
    // Leftover days keep the last weights; no update follows them.
    for (std::size_t t = i; t < t_len; ++t) {
        result.predictions[t] = vote(agents.classes, static_cast<Eigen::Index>(t), weights);
    }
    return result;
}

double evaluate_excluding_burnin(const std::vector<int>& predictions,
                                 const std::vector<int>& truth, std::size_t f) {
    if (predictions.size() != truth.size()) {
        throw SchemaError("prediction and truth lengths differ");
    }
    if (predictions.size() <= f) {
        throw EvaluationError("burn-in covers every day; nothing left to evaluate");
    }
    std::size_t wrong = 0;
    for (std::size_t t = f; t < predictions.size(); ++t) {
        if (predictions[t] != truth[t]) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(predictions.size() - f);
}

std::vector<std::pair<Date, std::map<std::string, double>>> weight_history_by_advisor(
    const WeightHistory& history, const std::vector<std::string>& agent_names,
    const std::map<std::string, std::string>& grouping) {
    for (const auto& name : agent_names) {
        if (grouping.find(name) == grouping.end()) {
            throw SchemaError("agent '" + name + "' has no advisor grouping");
        }
    }
    std::vector<std::pair<Date, std::map<std::string, double>>> out;
    out.reserve(history.epochs.size());
    for (const auto& epoch : history.epochs) {
        if (epoch.weights.size() != static_cast<Eigen::Index>(agent_names.size())) {
            throw SchemaError("epoch weight vector does not match agent count");
        }
        std::map<std::string, double> by_advisor;
        for (std::size_t a = 0; a < agent_names.size(); ++a) {
            by_advisor[grouping.at(agent_names[a])] += epoch.weights(static_cast<Eigen::Index>(a));
        }
        out.emplace_back(epoch.start, std::move(by_advisor));
    }
    return out;
}

std::vector<double> accuracy_history(const ensemble::AgentMatrix& agents,
                                     const TrendLabels& truth, const OnlineParams& params) {
    auto result = online_update(agents, truth, params);
    std::vector<double> curve;
    curve.reserve(truth.labels.size() - params.f);
    std::size_t right = 0;
    for (std::size_t t = params.f; t < truth.labels.size(); ++t) {
        if (result.predictions[t] == truth.labels[t]) ++right;
        curve.push_back(static_cast<double>(right) /
                        static_cast<double>(t - params.f + 1));
    }
    return curve;
}

std::vector<GridCell> grid_search_online(const ensemble::AgentMatrix& agents,
                                         const TrendLabels& truth,
                                         const std::vector<std::size_t>& f_values,
                                         const std::vector<double>& lambda_values,
                                         double gamma) {
    if (f_values.empty() || lambda_values.empty()) {
        throw ParamError("grid search needs at least one f and one lambda value");
    }
    std::vector<GridCell> grid;
    grid.reserve(f_values.size() * lambda_values.size());
    for (std::size_t f : f_values) {
        for (double lambda : lambda_values) {
            OnlineParams params{f, gamma, lambda};
            auto result = online_update(agents, truth, params);
            GridCell cell;
            cell.f = f;
            cell.lambda = lambda;
            cell.error = evaluate_excluding_burnin(result.predictions, truth.labels, f);
            grid.push_back(cell);
        }
    }
    std::sort(grid.begin(), grid.end(), [](const GridCell& a, const GridCell& b) {
        if (a.error != b.error) return a.error < b.error;
        if (a.f != b.f) return a.f < b.f;
        return a.lambda < b.lambda;
    });
    return grid;
}

void write_weight_history_csv(const WeightHistory& history,
                              const std::vector<std::string>& agent_names,
                              const std::string& path) {
    std::vector<std::string> header{"epoch", "start_date"};
    for (const auto& name : agent_names) header.push_back("weight:" + name);
    for (const auto& name : agent_names) header.push_back("score:" + name);
    std::vector<std::vector<std::string>> rows;
    rows.reserve(history.epochs.size());
    for (std::size_t e = 0; e < history.epochs.size(); ++e) {
        const auto& epoch = history.epochs[e];
        std::vector<std::string> row{std::to_string(e), epoch.start.to_string()};
        for (Eigen::Index a = 0; a < epoch.weights.size(); ++a) {
            row.push_back(format_double(epoch.weights(a)));
        }
        for (Eigen::Index a = 0; a < epoch.scores.size(); ++a) {
            row.push_back(format_double(epoch.scores(a)));
        }
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

void write_accuracy_history_csv(const std::vector<Date>& dates, std::size_t f,
                                const std::vector<double>& curve, const std::string& path) {
    if (dates.size() != curve.size() + f) {
        throw SchemaError("accuracy curve length does not match dates minus burn-in");
    }
    std::vector<std::vector<std::string>> rows;
    rows.reserve(curve.size());
    for (std::size_t t = 0; t < curve.size(); ++t) {
        rows.push_back({dates[f + t].to_string(), format_double(curve[t])});
    }
    write_csv(path, {"date", "accuracy"}, rows);
}

void write_grid_csv(const std::vector<GridCell>& grid, double gamma, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(grid.size());
    for (const auto& cell : grid) {
        rows.push_back({std::to_string(cell.f), format_double(cell.lambda),
                        format_double(gamma), format_double(cell.error)});
    }
    write_csv(path, {"f", "lambda", "gamma", "error"}, rows);
}

}  // namespace dynabe::online
