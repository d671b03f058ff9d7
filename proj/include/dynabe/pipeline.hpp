#pragma once

#include "dynabe/backtest.hpp"
#include "dynabe/baselines.hpp"
#include "dynabe/config.hpp"
#include "dynabe/ensemble.hpp"
#include "dynabe/feature_selection.hpp"
#include "dynabe/frame.hpp"
#include "dynabe/online_update.hpp"

#include <json.hpp>
#include <string>
#include <utility>
#include <vector>

namespace dynabe::pipeline {

/// Output of the ingest stage: the fully preprocessed frame (aligned,
/// differenced, lagged, standardized with train-only statistics), the trend
/// labels, the train/validation row split and a provenance record (per-source
/// row counts, rows dropped at each step, column lineage).
struct IngestResult {
    FeatureFrame frame;
    TrendLabels labels;
    SplitIndices split;
    StandardizeStats stats;
    nlohmann::json provenance;
};

IngestResult ingest(const PipelineConfig& config);

/// Expands each advisor's base feature names to the lagged columns present in
/// the frame (f, f_1, ..). Throws SchemaError naming any feature that does
/// not resolve.
std::vector<ensemble::AdvisorSpec> advisor_pools(const PipelineConfig& config,
                                                 const FeatureFrame& frame);

struct SelectionStage {
    std::vector<ensemble::AdvisorSpec> advisors;           // selected_features filled
    std::vector<selection::SelectionResult> results;       // parallel to advisors
};

/// Hybrid selection per advisor, on training rows only.
SelectionStage run_selection(const PipelineConfig& config, const IngestResult& data);

struct TrainStage {
    ensemble::AgentMatrix agents;
    std::vector<std::pair<std::string, learners::TuneResult>> tuning;
    std::vector<double> agent_errors;  // full-validation misclassification per agent
};

/// Tuned, bagged, stacked ensembles for every advisor; emits the validation
/// agent matrix.
TrainStage run_training(const PipelineConfig& config, const IngestResult& data,
                        const SelectionStage& selection);

struct OnlineStage {
    online::OnlineResult result;       // at (f_used, lambda_used)
    std::size_t f_used = 0;
    double lambda_used = 0.0;
    double error = 0.0;                // burn-in excluded
    std::vector<double> accuracy_curve;
    std::vector<online::GridCell> grid;  // filled in grid mode
};

/// Online weight tracking over the validation stream. In grid mode every
/// (grid_f x grid_lambda) cell is evaluated and the best cell becomes
/// (f_used, lambda_used); otherwise the configured (f, lambda) is used.
OnlineStage run_online_stage(const PipelineConfig& config, const IngestResult& data,
                             const ensemble::AgentMatrix& agents, bool grid_mode);

struct BacktestStage {
    backtest::AssetCurve curve;
    backtest::PerformanceReport report;
    std::vector<double> stock_closes;  // validation-period closes
    std::vector<double> index_closes;  // empty without a benchmark column
};

/// Naive long/flat strategy on the validation closes driven by the online
/// predictions; burn-in days are held in cash.
BacktestStage run_backtest_stage(const PipelineConfig& config, const IngestResult& data,
                                 const OnlineStage& online_stage);

/// Static baseline comparison on the union of the advisors' selected
/// features, burn-in convention matched to the online row.
baselines::ComparisonReport run_compare_stage(
    const PipelineConfig& config, const IngestResult& data, const SelectionStage& selection,
    const OnlineStage& online_stage,
    std::vector<std::pair<std::string, learners::TuneResult>>* tune_log = nullptr);

struct StageTiming {
    std::string stage;
    double milliseconds = 0.0;
};

struct RunArtifacts {
    IngestResult data;
    SelectionStage selection;
    TrainStage train;
    OnlineStage online_stage;
    BacktestStage backtest_stage;
    baselines::ComparisonReport comparison;  // valid when comparison_present
    bool comparison_present = false;
    bool grid_mode = false;
    std::vector<StageTiming> timings;
};

/// All stages in sequence, in memory. A stage failure surfaces as
/// PipelineError("stage '<name>': ...").
RunArtifacts run_pipeline(const PipelineConfig& config, bool grid_mode);

/// All stages with incremental persistence: each stage's artifacts are
/// written under out_dir as soon as the stage completes, so a failing run
/// leaves its partial outputs plus a manifest naming the failed stage.
/// `last_stage` stops early after the named stage ("ingest", "selection",
/// "train", "online", "backtest", "compare"); "all" finalizes the bundle
/// with manifest, summary and checksums. The compare stage is skipped on
/// full runs when the config disables baselines, but always runs when
/// explicitly requested as the last stage.
RunArtifacts run_and_persist(const PipelineConfig& config, bool grid_mode,
                             const std::string& out_dir,
                             const std::string& last_stage = "all");

nlohmann::json build_manifest(const PipelineConfig& config, const RunArtifacts& artifacts);
std::string render_summary(const PipelineConfig& config, const RunArtifacts& artifacts);

/// Full bundle dump: stage subdirectories, manifest.json, summary.txt,
/// timings.log and checksums.txt.
void write_bundle(const PipelineConfig& config, const RunArtifacts& artifacts,
                  const std::string& out_dir);

/// Hashes every regular file under the bundle (sorted relative paths) into
/// checksums.txt. timings.log is exempt: timings vary run to run and would
/// break byte-identical re-runs.
void write_checksums(const std::string& out_dir);

/// Throws IntegrityError on any missing, extra or modified checksummed file.
void verify_checksums(const std::string& out_dir);

/// Loads a persisted bundle, verifies its checksums and renders the five
/// report sections (selected features, stacking errors, online errors,
/// model comparison, backtest metrics).
std::string render_report(const std::string& bundle_dir);

}  // namespace dynabe::pipeline
