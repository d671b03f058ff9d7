#include "dynabe/pipeline.hpp"

#include "dynabe/errors.hpp"
#include "dynabe/io.hpp"
#include "dynabe/rng.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

namespace dynabe::pipeline {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

Eigen::MatrixXd design_matrix(const FeatureFrame& frame, const std::vector<std::string>& names,
                              const std::vector<std::size_t>& rows) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(names.size()));
    for (std::size_t j = 0; j < names.size(); ++j) {
        const std::vector<double>& col = frame.column(names[j]);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[rows[i]];
        }
    }
    return X;
}

Eigen::VectorXd label_vector(const TrendLabels& labels, const std::vector<std::size_t>& rows) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        y(static_cast<Eigen::Index>(i)) = static_cast<double>(labels.labels[rows[i]]);
    }
    return y;
}

std::vector<int> label_ints(const TrendLabels& labels, const std::vector<std::size_t>& rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (std::size_t row : rows) out.push_back(labels.labels[row]);
    return out;
}

std::vector<Date> dates_at(const std::vector<Date>& dates, const std::vector<std::size_t>& rows) {
    std::vector<Date> out;
    out.reserve(rows.size());
    for (std::size_t row : rows) out.push_back(dates[row]);
    return out;
}

std::vector<double> column_at(const FeatureFrame& frame, const std::string& name,
                              const std::vector<std::size_t>& rows) {
    const std::vector<double>& col = frame.column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t row : rows) out.push_back(col[row]);
    return out;
}

TrendLabels validation_truth(const IngestResult& data) {
    TrendLabels truth;
    truth.dates = dates_at(data.labels.dates, data.split.valid_rows);
    truth.labels = label_ints(data.labels, data.split.valid_rows);
    return truth;
}

template <typename Fn>
auto run_stage(std::vector<StageTiming>& timings, const std::string& name, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    try {
        auto out = fn();
        const auto stop = std::chrono::steady_clock::now();
        timings.push_back(
            {name, std::chrono::duration<double, std::milli>(stop - start).count()});
        return out;
    } catch (const Error& e) {
        throw PipelineError("stage '" + name + "': " + e.what());
    }
}

bool stage_done(const RunArtifacts& artifacts, const std::string& name) {
    for (const StageTiming& t : artifacts.timings) {
        if (t.stage == name) return true;
    }
    return false;
}

// --- bundle writers ---

void write_ingest_artifacts(const IngestResult& data, const fs::path& dir) {
    fs::create_directories(dir);
    std::vector<std::string> header{"date"};
    header.insert(header.end(), data.frame.names.begin(), data.frame.names.end());
    std::vector<std::vector<std::string>> rows;
    rows.reserve(data.frame.rows());
    for (std::size_t t = 0; t < data.frame.rows(); ++t) {
        std::vector<std::string> row{data.frame.dates[t].to_string()};
        for (std::size_t j = 0; j < data.frame.n_cols(); ++j) {
            row.push_back(format_double(data.frame.cols[j][t]));
        }
        rows.push_back(std::move(row));
    }
    write_csv((dir / "dataset.csv").string(), header, rows);

    std::vector<std::vector<std::string>> label_rows;
    label_rows.reserve(data.labels.size());
    for (std::size_t t = 0; t < data.labels.size(); ++t) {
        label_rows.push_back(
            {data.labels.dates[t].to_string(), std::to_string(data.labels.labels[t])});
    }
    write_csv((dir / "labels.csv").string(), {"date", "label"}, label_rows);
}

void write_selection_artifacts(const SelectionStage& selection, const fs::path& dir) {
    fs::create_directories(dir);
    for (std::size_t i = 0; i < selection.advisors.size(); ++i) {
        write_csv((dir / (selection.advisors[i].name + ".csv")).string(),
                  selection::selection_report_header(),
                  selection::selection_report_rows(selection.results[i]));
    }
}

void write_train_artifacts(const TrainStage& train, const fs::path& dir) {
    fs::create_directories(dir);
    ensemble::write_agent_matrix_csv(train.agents, (dir / "agents.csv").string());
    write_csv((dir / "tuning.csv").string(), learners::tuning_report_header(),
              learners::tuning_report_rows(train.tuning));
    std::vector<std::vector<std::string>> rows;
    for (std::size_t a = 0; a < train.agents.agent_names.size(); ++a) {
        rows.push_back({train.agents.agent_names[a], format_double(train.agent_errors[a])});
    }
    write_csv((dir / "agent_errors.csv").string(), {"agent", "misclassification"}, rows);
}

void write_online_artifacts(const OnlineStage& online_stage, const TrendLabels& truth,
                            const std::vector<std::string>& agent_names, const fs::path& dir) {
    fs::create_directories(dir);
    std::vector<std::vector<std::string>> rows;
    rows.reserve(truth.size());
    for (std::size_t t = 0; t < truth.size(); ++t) {
        rows.push_back({truth.dates[t].to_string(),
                        std::to_string(online_stage.result.predictions[t]),
                        std::to_string(truth.labels[t])});
    }
    write_csv((dir / "predictions.csv").string(), {"date", "predicted", "actual"}, rows);
    online::write_weight_history_csv(online_stage.result.history, agent_names,
                                     (dir / "weights.csv").string());
    online::write_accuracy_history_csv(truth.dates, online_stage.f_used,
                                       online_stage.accuracy_curve,
                                       (dir / "accuracy.csv").string());
    if (!online_stage.grid.empty()) {
        online::write_grid_csv(online_stage.grid, 0.0, (dir / "grid.csv").string());
    }
}

void write_backtest_artifacts(const BacktestStage& backtest_stage, const fs::path& dir) {
    fs::create_directories(dir);
    backtest::write_curve_csv(backtest_stage.curve, backtest_stage.stock_closes,
                              backtest_stage.index_closes, (dir / "curve.csv").string());
    write_csv((dir / "metrics.csv").string(), backtest::report_csv_header(),
              {backtest::report_csv_row("dynabe", backtest_stage.report)});
}

void write_compare_artifacts(const baselines::ComparisonReport& comparison, const fs::path& dir) {
    fs::create_directories(dir);
    baselines::write_comparison_csv(comparison, (dir / "comparison.csv").string());
}

void write_timings(const std::vector<StageTiming>& timings, const fs::path& dir) {
    std::ostringstream out;
    for (const StageTiming& t : timings) {
        out << t.stage << "," << format_double(t.milliseconds) << "\n";
    }
    write_text_file((dir / "timings.log").string(), out.str());
}

json hyperparams_json(const learners::Hyperparams& hp) {
    json out = json::object();
    for (const auto& [key, value] : hp) out[key] = value;
    return out;
}

}  // namespace

IngestResult ingest(const PipelineConfig& config) {
    config.validate();

    std::vector<FeatureFrame> frames;
    json sources = json::array();
    for (std::size_t i = 0; i < config.data.sources.size(); ++i) {
        frames.push_back(read_feature_csv(config.resolved_source(i)));
        sources.push_back({{"path", config.data.sources[i]},
                           {"rows", frames.back().rows()},
                           {"columns", frames.back().n_cols()}});
    }

    FeatureFrame aligned = align_calendars(frames);
    aligned.set_close(config.data.close_column);
    if (!config.data.benchmark_column.empty()) {
        aligned.add_passthrough(config.data.benchmark_column);
    }
    const std::size_t aligned_rows = aligned.rows();

    for (const std::string& name : config.preprocess.difference_columns) {
        if (!aligned.has_column(name)) {
            throw SchemaError("difference column '" + name + "' is not an ingested column");
        }
    }
    FeatureFrame diffed = first_difference(aligned, config.preprocess.difference_columns);
    const std::size_t diffed_rows = diffed.rows();
    const std::vector<std::string> base_features = diffed.feature_names();

    FeatureFrame lagged = make_lags(diffed, config.preprocess.max_lag);
    TrendLabels labels = make_labels(lagged);

    SplitSpec spec;
    spec.train_range = {config.split.train_start, config.split.train_end};
    spec.valid_range = {config.split.valid_start, config.split.valid_end};
    SplitIndices idx = split(lagged, labels, spec);

    auto [standardized, stats] =
        standardize(lagged, idx.train_rows.front(), idx.train_rows.back() + 1);

    json lineage = json::array();
    for (const std::string& base : base_features) {
        const bool differenced = config.preprocess.difference_columns.count(base) > 0;
        for (std::size_t lag = 0; lag <= config.preprocess.max_lag; ++lag) {
            const std::string name = lag == 0 ? base : base + "_" + std::to_string(lag);
            lineage.push_back({{"column", name},
                               {"base", base},
                               {"lag", lag},
                               {"differenced", differenced},
                               {"role", "feature"}});
        }
    }
    for (const std::string& name : standardized.passthrough) {
        lineage.push_back({{"column", name},
                           {"base", name},
                           {"lag", 0},
                           {"differenced", false},
                           {"role", name == standardized.close_name ? "close" : "benchmark"}});
    }

    json provenance;
    provenance["sources"] = sources;
    provenance["aligned_rows"] = aligned_rows;
    provenance["after_difference_rows"] = diffed_rows;
    provenance["after_lag_rows"] = lagged.rows();
    provenance["labeled_rows"] = labels.size();
    provenance["train_rows"] = idx.train_rows.size();
    provenance["valid_rows"] = idx.valid_rows.size();
    provenance["dropped"] = {{"differencing", aligned_rows - diffed_rows},
                             {"lags", diffed_rows - lagged.rows()},
                             {"label", lagged.rows() - labels.size()}};
    provenance["columns"] = lineage;

    IngestResult out;
    out.frame = std::move(standardized);
    out.labels = std::move(labels);
    out.split = std::move(idx);
    out.stats = std::move(stats);
    out.provenance = std::move(provenance);
    return out;
}

std::vector<ensemble::AdvisorSpec> advisor_pools(const PipelineConfig& config,
                                                 const FeatureFrame& frame) {
    std::vector<ensemble::AdvisorSpec> out;
    for (const AdvisorConfig& advisor : config.advisors) {
        ensemble::AdvisorSpec spec;
        spec.name = advisor.name;
        std::vector<std::string> missing;
        for (const std::string& base : advisor.features) {
            if (!frame.has_column(base) || !frame.is_feature(base)) {
                missing.push_back(base);
                continue;
            }
            spec.feature_pool.push_back(base);
            for (std::size_t lag = 1; lag <= config.preprocess.max_lag; ++lag) {
                const std::string lagged = base + "_" + std::to_string(lag);
                if (frame.has_column(lagged)) spec.feature_pool.push_back(lagged);
            }
        }
        if (!missing.empty()) {
            std::string joined;
            for (const std::string& name : missing) {
                if (!joined.empty()) joined += ", ";
                joined += "'" + name + "'";
            }
            throw SchemaError("advisor '" + advisor.name +
                              "': features do not resolve against ingested columns: " + joined);
        }
        out.push_back(std::move(spec));
    }
    return out;
}

SelectionStage run_selection(const PipelineConfig& config, const IngestResult& data) {
    SelectionStage stage;
    stage.advisors = advisor_pools(config, data.frame);
    const Eigen::VectorXd train_y = label_vector(data.labels, data.split.train_rows);
    for (std::size_t i = 0; i < stage.advisors.size(); ++i) {
        ensemble::AdvisorSpec& advisor = stage.advisors[i];
        const Eigen::MatrixXd X = design_matrix(data.frame, advisor.feature_pool,
                                                data.split.train_rows);
        selection::SelectionResult result = selection::run_hybrid_selection(
            X, advisor.feature_pool, train_y, config.selection.keep_fraction,
            derive_seed(config.seed, "selection", i), config.selection.p_threshold,
            config.selection.relieff_neighbors,
            static_cast<int>(config.selection.importance_trees));
        if (result.selected.empty()) {
            throw DataError("advisor '" + advisor.name + "': no features survive selection");
        }
        advisor.selected_features = result.selected;
        stage.results.push_back(std::move(result));
    }
    return stage;
}

TrainStage run_training(const PipelineConfig& config, const IngestResult& data,
                        const SelectionStage& selection) {
    std::vector<ensemble::AdvisorData> advisors;
    for (const ensemble::AdvisorSpec& spec : selection.advisors) {
        ensemble::AdvisorData advisor;
        advisor.spec = spec;
        advisor.train_X = design_matrix(data.frame, spec.selected_features, data.split.train_rows);
        advisor.valid_X = design_matrix(data.frame, spec.selected_features, data.split.valid_rows);
        advisors.push_back(std::move(advisor));
    }
    const Eigen::VectorXd train_y = label_vector(data.labels, data.split.train_rows);
    const std::vector<Date> valid_dates = dates_at(data.labels.dates, data.split.valid_rows);

    ensemble::BagParams params;
    params.n_samples = config.ensemble.bootstrap_samples;
    params.sample_frac = config.ensemble.sample_fraction;
    params.bootstrap = true;
    params.folds = config.ensemble.stacking_folds;

    TrainStage stage;
    stage.agents = ensemble::build_all_advisors(advisors, train_y, valid_dates, params,
                                                derive_seed(config.seed, "ensemble"),
                                                &stage.tuning);

    const std::vector<int> truth = label_ints(data.labels, data.split.valid_rows);
    for (std::size_t a = 0; a < stage.agents.agent_names.size(); ++a) {
        std::size_t wrong = 0;
        for (std::size_t t = 0; t < truth.size(); ++t) {
            if (stage.agents.classes(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(a)) !=
                truth[t]) {
                ++wrong;
            }
        }
        stage.agent_errors.push_back(static_cast<double>(wrong) /
                                     static_cast<double>(truth.size()));
    }
    return stage;
}

OnlineStage run_online_stage(const PipelineConfig& config, const IngestResult& data,
                             const ensemble::AgentMatrix& agents, bool grid_mode) {
    const TrendLabels truth = validation_truth(data);

    OnlineStage stage;
    if (grid_mode) {
        if (config.online.grid_f.empty() || config.online.grid_lambda.empty()) {
            throw ParamError("grid mode needs online.grid_f and online.grid_lambda in the config");
        }
        stage.grid = online::grid_search_online(agents, truth, config.online.grid_f,
                                                config.online.grid_lambda, config.online.gamma);
        stage.f_used = stage.grid.front().f;
        stage.lambda_used = stage.grid.front().lambda;
    } else {
        stage.f_used = config.online.f;
        stage.lambda_used = config.online.lambda;
    }

    online::OnlineParams params;
    params.f = stage.f_used;
    params.gamma = config.online.gamma;
    params.lambda = stage.lambda_used;
    stage.result = online::online_update(agents, truth, params);
    stage.error = online::evaluate_excluding_burnin(stage.result.predictions, truth.labels,
                                                    stage.f_used);
    stage.accuracy_curve = online::accuracy_history(agents, truth, params);
    return stage;
}

BacktestStage run_backtest_stage(const PipelineConfig& config, const IngestResult& data,
                                 const OnlineStage& online_stage) {
    BacktestStage stage;
    const std::vector<Date> valid_dates = dates_at(data.labels.dates, data.split.valid_rows);
    stage.stock_closes = column_at(data.frame, data.frame.close_name, data.split.valid_rows);
    if (!config.data.benchmark_column.empty()) {
        stage.index_closes = column_at(data.frame, config.data.benchmark_column,
                                       data.split.valid_rows);
    } else {
        // No benchmark configured: compare against holding cash at a flat 1.0.
        stage.index_closes.assign(stage.stock_closes.size(), 1.0);
    }

    std::vector<int> signals;
    if (!valid_dates.empty()) {
        signals.reserve(valid_dates.size() - 1);
        for (std::size_t t = 0; t + 1 < valid_dates.size(); ++t) {
            const bool burnin = t < online_stage.f_used;
            signals.push_back(burnin ? 0 : online_stage.result.predictions[t]);
        }
    }
    stage.curve = backtest::run_naive_strategy(valid_dates, stage.stock_closes, signals);
    stage.report = backtest::evaluate_strategy(stage.curve, stage.stock_closes,
                                               stage.index_closes, config.backtest.risk_free_rate,
                                               config.backtest.trading_days_per_year);
    return stage;
}

baselines::ComparisonReport run_compare_stage(
    const PipelineConfig& config, const IngestResult& data, const SelectionStage& selection,
    const OnlineStage& online_stage,
    std::vector<std::pair<std::string, learners::TuneResult>>* tune_log) {
    std::set<std::string> chosen;
    for (const ensemble::AdvisorSpec& advisor : selection.advisors) {
        chosen.insert(advisor.selected_features.begin(), advisor.selected_features.end());
    }
    std::vector<std::string> features;  // frame order, advisors' selections merged
    for (const std::string& name : data.frame.feature_names()) {
        if (chosen.count(name)) features.push_back(name);
    }

    const Eigen::MatrixXd train_X = design_matrix(data.frame, features, data.split.train_rows);
    const Eigen::MatrixXd valid_X = design_matrix(data.frame, features, data.split.valid_rows);
    const Eigen::VectorXd train_y = label_vector(data.labels, data.split.train_rows);
    const std::vector<int> truth = label_ints(data.labels, data.split.valid_rows);

    std::vector<std::pair<std::string, learners::TuneResult>> local_log;
    baselines::ComparisonReport report = baselines::run_baselines(
        train_X, train_y, valid_X, truth, online_stage.f_used, online_stage.error,
        derive_seed(config.seed, "baselines"), tune_log ? &local_log : nullptr);
    if (tune_log) {
        for (auto& [name, tuned] : local_log) {
            tune_log->emplace_back("baseline/" + name, std::move(tuned));
        }
    }
    return report;
}

RunArtifacts run_pipeline(const PipelineConfig& config, bool grid_mode) {
    RunArtifacts artifacts;
    artifacts.grid_mode = grid_mode;
    artifacts.data = run_stage(artifacts.timings, "ingest", [&] { return ingest(config); });
    artifacts.selection = run_stage(artifacts.timings, "selection",
                                    [&] { return run_selection(config, artifacts.data); });
    artifacts.train = run_stage(artifacts.timings, "train", [&] {
        return run_training(config, artifacts.data, artifacts.selection);
    });
    artifacts.online_stage = run_stage(artifacts.timings, "online", [&] {
        return run_online_stage(config, artifacts.data, artifacts.train.agents, grid_mode);
    });
    artifacts.backtest_stage = run_stage(artifacts.timings, "backtest", [&] {
        return run_backtest_stage(config, artifacts.data, artifacts.online_stage);
    });
    if (config.baselines_enabled) {
        artifacts.comparison = run_stage(artifacts.timings, "compare", [&] {
            return run_compare_stage(config, artifacts.data, artifacts.selection,
                                     artifacts.online_stage, &artifacts.train.tuning);
        });
        artifacts.comparison_present = true;
    }
    return artifacts;
}

RunArtifacts run_and_persist(const PipelineConfig& config, bool grid_mode,
                             const std::string& out_dir, const std::string& last_stage) {
    static const std::set<std::string> known{"ingest",   "selection", "train", "online",
                                             "backtest", "compare",   "all"};
    if (!known.count(last_stage)) {
        throw ParamError("unknown stage '" + last_stage + "'");
    }
    const fs::path root(out_dir);
    fs::create_directories(root);

    RunArtifacts artifacts;
    artifacts.grid_mode = grid_mode;
    const auto stop_after = [&](const char* name) { return last_stage == name; };
    try {
        artifacts.data = run_stage(artifacts.timings, "ingest", [&] { return ingest(config); });
        write_ingest_artifacts(artifacts.data, root / "ingest");
        if (stop_after("ingest")) return artifacts;

        artifacts.selection = run_stage(artifacts.timings, "selection",
                                        [&] { return run_selection(config, artifacts.data); });
        write_selection_artifacts(artifacts.selection, root / "selection");
        if (stop_after("selection")) return artifacts;

        artifacts.train = run_stage(artifacts.timings, "train", [&] {
            return run_training(config, artifacts.data, artifacts.selection);
        });
        write_train_artifacts(artifacts.train, root / "train");
        if (stop_after("train")) return artifacts;

        artifacts.online_stage = run_stage(artifacts.timings, "online", [&] {
            return run_online_stage(config, artifacts.data, artifacts.train.agents, grid_mode);
        });
        write_online_artifacts(artifacts.online_stage, validation_truth(artifacts.data),
                               artifacts.train.agents.agent_names, root / "online");
        if (stop_after("online")) return artifacts;

        artifacts.backtest_stage = run_stage(artifacts.timings, "backtest", [&] {
            return run_backtest_stage(config, artifacts.data, artifacts.online_stage);
        });
        write_backtest_artifacts(artifacts.backtest_stage, root / "backtest");
        if (stop_after("backtest")) return artifacts;

        if (config.baselines_enabled || stop_after("compare")) {
            artifacts.comparison = run_stage(artifacts.timings, "compare", [&] {
                return run_compare_stage(config, artifacts.data, artifacts.selection,
                                         artifacts.online_stage, &artifacts.train.tuning);
            });
            artifacts.comparison_present = true;
            write_compare_artifacts(artifacts.comparison, root / "compare");
        }
        if (stop_after("compare")) return artifacts;
    } catch (const PipelineError& e) {
        json manifest = build_manifest(config, artifacts);
        manifest["status"] = "failed";
        manifest["error"] = e.what();
        write_text_file((root / "manifest.json").string(), manifest.dump(2) + "\n");
        write_timings(artifacts.timings, root);
        write_checksums(out_dir);
        throw;
    }

    write_bundle(config, artifacts, out_dir);
    return artifacts;
}

nlohmann::json build_manifest(const PipelineConfig& config, const RunArtifacts& artifacts) {
    json manifest;
    manifest["config"] = config_to_json(config);
    manifest["seed"] = config.seed;
    manifest["grid_mode"] = artifacts.grid_mode;
    manifest["status"] = "ok";

    json stages = json::array();
    for (const StageTiming& t : artifacts.timings) stages.push_back(t.stage);
    manifest["stages"] = stages;

    if (stage_done(artifacts, "ingest")) {
        manifest["provenance"] = artifacts.data.provenance;
    }
    if (stage_done(artifacts, "selection")) {
        json selected = json::object();
        for (const ensemble::AdvisorSpec& advisor : artifacts.selection.advisors) {
            selected[advisor.name] = {{"pool_size", advisor.feature_pool.size()},
                                      {"selected", advisor.selected_features}};
        }
        manifest["selected_features"] = selected;
    }

    json protocol;
    protocol["n_advisors"] = config.advisors.size();
    protocol["bootstrap_samples"] = config.ensemble.bootstrap_samples;
    protocol["sample_fraction"] = config.ensemble.sample_fraction;
    protocol["stacking_folds"] = config.ensemble.stacking_folds;
    json stackers = json::array();
    for (ensemble::Stacker stacker : ensemble::kStackerOrder) {
        stackers.push_back(ensemble::to_string(stacker));
    }
    protocol["stackers"] = stackers;
    protocol["gamma"] = config.online.gamma;
    if (stage_done(artifacts, "train")) {
        protocol["n_agents"] = artifacts.train.agents.agent_names.size();
        protocol["agents"] = artifacts.train.agents.agent_names;
    }
    if (stage_done(artifacts, "online")) {
        protocol["f"] = artifacts.online_stage.f_used;
        protocol["lambda"] = artifacts.online_stage.lambda_used;
    }
    manifest["protocol"] = protocol;

    json results = json::object();
    if (stage_done(artifacts, "train")) {
        json agent_errors = json::object();
        for (std::size_t a = 0; a < artifacts.train.agents.agent_names.size(); ++a) {
            agent_errors[artifacts.train.agents.agent_names[a]] = artifacts.train.agent_errors[a];
        }
        results["agent_errors"] = agent_errors;
        json chosen = json::object();
        for (const auto& [context, tuned] : artifacts.train.tuning) {
            chosen[context] = hyperparams_json(tuned.best);
        }
        results["chosen_hyperparameters"] = chosen;
    }
    if (stage_done(artifacts, "online")) {
        results["online_error"] = artifacts.online_stage.error;
        results["epochs"] = artifacts.online_stage.result.history.epochs.size();
        if (!artifacts.online_stage.grid.empty()) {
            json grid = json::array();
            for (const online::GridCell& cell : artifacts.online_stage.grid) {
                grid.push_back({{"f", cell.f}, {"lambda", cell.lambda}, {"error", cell.error}});
            }
            results["grid"] = grid;
        }
    }
    if (stage_done(artifacts, "backtest")) {
        const backtest::PerformanceReport& r = artifacts.backtest_stage.report;
        results["backtest"] = {{"annualized", r.annualized},
                               {"stock_annualized", r.stock_annualized},
                               {"index_annualized", r.index_annualized},
                               {"excess_vs_stock", r.excess_vs_stock},
                               {"excess_vs_index", r.excess_vs_index},
                               {"sharpe", r.sharpe},
                               {"max_drawdown", r.drawdown}};
    }
    if (artifacts.comparison_present) {
        json rows = json::array();
        for (const baselines::BaselineRow& row : artifacts.comparison.rows) {
            rows.push_back({{"model", row.model}, {"error", row.error}});
        }
        results["comparison"] = {{"rows", rows}, {"note", artifacts.comparison.note}};
    }
    manifest["results"] = results;
    return manifest;
}

std::string render_summary(const PipelineConfig& config, const RunArtifacts& artifacts) {
    std::ostringstream out;
    out << "run summary\n";
    out << "===========\n\n";
    out << "seed: " << config.seed << "\n";
    out << "grid mode: " << (artifacts.grid_mode ? "yes" : "no") << "\n";
    out << "stages:";
    for (const StageTiming& t : artifacts.timings) out << " " << t.stage;
    out << "\n";
    out << "timings: see timings.log\n";

    const json& prov = artifacts.data.provenance;
    out << "\ndata\n----\n";
    for (const json& source : prov["sources"]) {
        out << "source: " << source["path"].get<std::string>() << " ("
            << source["rows"].get<std::size_t>() << " rows, "
            << source["columns"].get<std::size_t>() << " columns)\n";
    }
    out << "aligned rows: " << prov["aligned_rows"].get<std::size_t>()
        << ", after differencing: " << prov["after_difference_rows"].get<std::size_t>()
        << ", after lags: " << prov["after_lag_rows"].get<std::size_t>()
        << ", labeled: " << prov["labeled_rows"].get<std::size_t>() << "\n";
    out << "train rows: " << prov["train_rows"].get<std::size_t>()
        << ", validation rows: " << prov["valid_rows"].get<std::size_t>() << "\n";

    out << "\nselected features\n-----------------\n";
    for (const ensemble::AdvisorSpec& advisor : artifacts.selection.advisors) {
        out << advisor.name << " (pool " << advisor.feature_pool.size() << ", kept "
            << advisor.selected_features.size() << "):";
        for (const std::string& name : advisor.selected_features) out << " " << name;
        out << "\n";
    }

    out << "\nstacking validation errors\n--------------------------\n";
    for (std::size_t a = 0; a < artifacts.train.agents.agent_names.size(); ++a) {
        out << artifacts.train.agents.agent_names[a] << ": "
            << format_double(artifacts.train.agent_errors[a]) << "\n";
    }

    out << "\nonline update\n-------------\n";
    out << "f: " << artifacts.online_stage.f_used
        << ", gamma: " << format_double(config.online.gamma)
        << ", lambda: " << format_double(artifacts.online_stage.lambda_used) << "\n";
    out << "misclassification (burn-in excluded): "
        << format_double(artifacts.online_stage.error) << "\n";
    out << "epochs: " << artifacts.online_stage.result.history.epochs.size() << "\n";
    if (!artifacts.online_stage.grid.empty()) {
        out << "grid (f, lambda -> error):\n";
        for (const online::GridCell& cell : artifacts.online_stage.grid) {
            out << "  f=" << cell.f << " lambda=" << format_double(cell.lambda) << " -> "
                << format_double(cell.error) << "\n";
        }
    }

    out << "\nchosen hyperparameters\n----------------------\n";
    for (const auto& [context, tuned] : artifacts.train.tuning) {
        out << context << ":";
        for (const auto& [key, value] : tuned.best) {
            out << " " << key << "=" << format_double(value);
        }
        out << "\n";
    }

    out << "\nmodel comparison\n----------------\n";
    if (artifacts.comparison_present) {
        for (const baselines::BaselineRow& row : artifacts.comparison.rows) {
            out << row.model << ": " << format_double(row.error) << "\n";
        }
        out << "note: " << artifacts.comparison.note << "\n";
    } else {
        out << "skipped\n";
    }

    const backtest::PerformanceReport& r = artifacts.backtest_stage.report;
    out << "\nbacktest\n--------\n";
    out << "annualized return: " << format_double(r.annualized) << "\n";
    out << "stock buy-and-hold: " << format_double(r.stock_annualized) << "\n";
    out << "index buy-and-hold: " << format_double(r.index_annualized) << "\n";
    out << "excess vs stock: " << format_double(r.excess_vs_stock) << "\n";
    out << "excess vs index: " << format_double(r.excess_vs_index) << "\n";
    out << "sharpe: " << format_double(r.sharpe) << "\n";
    out << "max drawdown: " << format_double(r.drawdown) << "\n";
    return out.str();
}

void write_bundle(const PipelineConfig& config, const RunArtifacts& artifacts,
                  const std::string& out_dir) {
    const fs::path root(out_dir);
    fs::create_directories(root);
    write_ingest_artifacts(artifacts.data, root / "ingest");
    write_selection_artifacts(artifacts.selection, root / "selection");
    write_train_artifacts(artifacts.train, root / "train");
    write_online_artifacts(artifacts.online_stage, validation_truth(artifacts.data),
                           artifacts.train.agents.agent_names, root / "online");
    write_backtest_artifacts(artifacts.backtest_stage, root / "backtest");
    if (artifacts.comparison_present) {
        write_compare_artifacts(artifacts.comparison, root / "compare");
    }
    write_text_file((root / "manifest.json").string(),
                    build_manifest(config, artifacts).dump(2) + "\n");
    write_text_file((root / "summary.txt").string(), render_summary(config, artifacts));
    write_timings(artifacts.timings, root);
    write_checksums(out_dir);
}

namespace {

// Files whose bytes legitimately differ between identical runs.
bool checksum_exempt(const std::string& relative) {
    return relative == "checksums.txt" || relative == "timings.log";
}

std::vector<std::string> bundle_files(const fs::path& root) {
    std::vector<std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        const std::string relative = fs::relative(entry.path(), root).generic_string();
        if (checksum_exempt(relative)) continue;
        files.push_back(relative);
    }
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace

void write_checksums(const std::string& out_dir) {
    const fs::path root(out_dir);
    std::ostringstream out;
    for (const std::string& relative : bundle_files(root)) {
        out << content_hash(read_text_file((root / relative).string())) << "  " << relative
            << "\n";
    }
    write_text_file((root / "checksums.txt").string(), out.str());
}

void verify_checksums(const std::string& out_dir) {
    const fs::path root(out_dir);
    const fs::path listing = root / "checksums.txt";
    if (!fs::exists(listing)) {
        throw IntegrityError("bundle has no checksums.txt: " + out_dir);
    }
    std::map<std::string, std::string> expected;
    std::istringstream in(read_text_file(listing.string()));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::size_t gap = line.find("  ");
        if (gap == std::string::npos) {
            throw IntegrityError("malformed checksums.txt line: " + line);
        }
        expected[line.substr(gap + 2)] = line.substr(0, gap);
    }
    for (const auto& [relative, hash] : expected) {
        const fs::path path = root / relative;
        if (!fs::exists(path)) {
            throw IntegrityError("bundle file missing: " + relative);
        }
        if (content_hash(read_text_file(path.string())) != hash) {
            throw IntegrityError("checksum mismatch: " + relative);
        }
    }
    for (const std::string& relative : bundle_files(root)) {
        if (!expected.count(relative)) {
            throw IntegrityError("file not covered by checksums: " + relative);
        }
    }
}

}  // namespace dynabe::pipeline
