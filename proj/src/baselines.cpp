#include "dynabe/baselines.hpp"

#include "dynabe/errors.hpp"
#include "dynabe/io.hpp"
#include "dynabe/rng.hpp"

namespace dynabe::baselines {

ComparisonReport run_baselines(
    const Eigen::MatrixXd& train_X, const Eigen::VectorXd& train_y,
    const Eigen::MatrixXd& valid_X, const std::vector<int>& valid_truth,
    std::size_t burnin_f, double online_error, std::uint64_t seed,
    std::vector<std::pair<std::string, learners::TuneResult>>* tune_log) {
    if (static_cast<Eigen::Index>(valid_truth.size()) != valid_X.rows()) {
        throw SchemaError("validation truth length does not match rows");
    }
    if (valid_truth.size() <= burnin_f) {
        throw EvaluationError("burn-in leaves no validation days to score");
    }
    if (!(online_error >= 0.0 && online_error <= 1.0)) {
        throw ParamError("online error must lie in [0, 1]");
    }

    const learners::ModelKind kinds[3] = {
        learners::ModelKind::kSvmRbf,
        learners::ModelKind::kMlp,
        learners::ModelKind::kRandomForest,
    };

    ComparisonReport report;
    for (std::size_t k = 0; k < 3; ++k) {
        const auto kind = kinds[k];
        auto spec = learners::default_search_spec(kind);
        auto tuned = learners::tune(kind, train_X, train_y, spec,
                                    derive_seed(seed, "baseline_tune", k));
        if (tune_log != nullptr) {
            tune_log->emplace_back(learners::to_string(kind), tuned);
        }
        auto model = learners::fit_model(kind, train_X, train_y, tuned.best,
                                         derive_seed(seed, "baseline_fit", k));
        std::size_t wrong = 0;
        for (std::size_t t = burnin_f; t < valid_truth.size(); ++t) {
            if (model->classify(valid_X.row(static_cast<Eigen::Index>(t))) != valid_truth[t]) {
                ++wrong;
            }
        }
        report.rows.push_back(
            {learners::to_string(kind),
             static_cast<double>(wrong) / static_cast<double>(valid_truth.size() - burnin_f)});
    }
    report.rows.push_back({"dynabe_online", online_error});
    report.note =
        "online row reports its best (f, lambda) on the validation set; "
        "static rows are tuned on training CV only";
    return report;
}

void write_comparison_csv(const ComparisonReport& report, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(report.rows.size());
    for (const auto& row : report.rows) {
        rows.push_back({row.model, format_double(row.error)});
    }
    write_csv(path, {"model", "misclassification"}, rows);
}

}  // namespace dynabe::baselines
