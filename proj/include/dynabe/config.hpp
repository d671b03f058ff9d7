#pragma once

#include "dynabe/date.hpp"

#include <cstdint>
#include <json.hpp>
#include <set>
#include <string>
#include <vector>

namespace dynabe::pipeline {

struct DataConfig {
    std::vector<std::string> sources;  // CSV paths as written in the config
    std::string close_column;
    std::string benchmark_column;
};

struct PreprocessConfig {
    std::set<std::string> difference_columns;
    std::size_t max_lag = 5;
};

struct AdvisorConfig {
    std::string name;
    std::vector<std::string> features;  // base names; lagged copies join the pool
};

struct SelectionConfig {
    double keep_fraction = 0.2;
    double p_threshold = 0.5;
    std::size_t relieff_neighbors = 10;
    std::size_t importance_trees = 200;
};

struct SplitConfig {
    Date train_start;
    Date train_end;
    Date valid_start;
    Date valid_end;
};

struct EnsembleConfig {
    std::size_t bootstrap_samples = 10;
    double sample_fraction = 0.8;
    std::size_t stacking_folds = 5;
};

struct OnlineConfig {
    std::size_t f = 5;
    double gamma = 0.8;
    double lambda = 0.0;
    std::vector<std::size_t> grid_f;      // used by grid mode
    std::vector<double> grid_lambda;
};

struct BacktestConfig {
    double risk_free_rate = 0.0;
    double trading_days_per_year = 250.0;
};

struct PipelineConfig {
    DataConfig data;
    PreprocessConfig preprocess;
    std::vector<AdvisorConfig> advisors;
    SelectionConfig selection;
    SplitConfig split;
    EnsembleConfig ensemble;
    OnlineConfig online;
    BacktestConfig backtest;
    bool baselines_enabled = true;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    // Directory relative source paths resolve against at read time. Set by
    // load_config; never serialized, so bundles carry only as-written paths.
    std::string source_base;

    /// Range and cross-field checks; throws ParamError/SchemaError.
    void validate() const;

    /// `sources[i]` joined onto source_base when relative.
    std::string resolved_source(std::size_t i) const;
};

/// Strict deserialization: unknown keys anywhere are SchemaErrors naming the
/// offending path, so config typos fail loudly.
PipelineConfig config_from_json(const nlohmann::json& j);

/// Reads and parses a config file; the config's directory is recorded as the
/// base that relative data source paths resolve against.
PipelineConfig load_config(const std::string& path);

nlohmann::json config_to_json(const PipelineConfig& config);

}  // namespace dynabe::pipeline
