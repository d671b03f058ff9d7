#include "dynabe/config.hpp"

#include "dynabe/errors.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace dynabe::pipeline {
namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& path) {
    if (!j.is_object())
        throw SchemaError("config: '" + path + "' must be an object");
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    require_object(j, path);
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key()))
            throw SchemaError("config: unknown key '" + (path.empty() ? it.key() : path + "." + it.key()) +
                              "'");
    }
}

const json* find(const json& j, const std::string& key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string())
        throw SchemaError("config: '" + path + "' must be a string");
    return j.get<std::string>();
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number())
        throw SchemaError("config: '" + path + "' must be a number");
    return j.get<double>();
}

std::size_t get_count(const json& j, const std::string& path) {
    if (!j.is_number_integer() || j.get<long long>() < 0)
        throw SchemaError("config: '" + path + "' must be a non-negative integer");
    return static_cast<std::size_t>(j.get<long long>());
}

bool get_bool(const json& j, const std::string& path) {
    if (!j.is_boolean())
        throw SchemaError("config: '" + path + "' must be a boolean");
    return j.get<bool>();
}

std::vector<std::string> get_string_list(const json& j, const std::string& path) {
    if (!j.is_array())
        throw SchemaError("config: '" + path + "' must be an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(get_string(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

Date get_date(const json& j, const std::string& path) {
    const std::string text = get_string(j, path);
    try {
        return Date::parse(text);
    } catch (const Error& e) {
        throw SchemaError("config: '" + path + "': " + e.what());
    }
}

DataConfig parse_data(const json& j) {
    check_keys(j, "data", {"sources", "close_column", "benchmark_column"});
    DataConfig out;
    if (const json* v = find(j, "sources")) out.sources = get_string_list(*v, "data.sources");
    if (const json* v = find(j, "close_column")) out.close_column = get_string(*v, "data.close_column");
    if (const json* v = find(j, "benchmark_column"))
        out.benchmark_column = get_string(*v, "data.benchmark_column");
    return out;
}

PreprocessConfig parse_preprocess(const json& j) {
    check_keys(j, "preprocess", {"difference_columns", "max_lag"});
    PreprocessConfig out;
    if (const json* v = find(j, "difference_columns")) {
        for (const std::string& name : get_string_list(*v, "preprocess.difference_columns"))
            out.difference_columns.insert(name);
    }
    if (const json* v = find(j, "max_lag")) out.max_lag = get_count(*v, "preprocess.max_lag");
    return out;
}

std::vector<AdvisorConfig> parse_advisors(const json& j) {
    if (!j.is_array())
        throw SchemaError("config: 'advisors' must be an array");
    std::vector<AdvisorConfig> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string path = "advisors[" + std::to_string(i) + "]";
        check_keys(j[i], path, {"name", "features"});
        AdvisorConfig advisor;
        if (const json* v = find(j[i], "name")) advisor.name = get_string(*v, path + ".name");
        if (const json* v = find(j[i], "features"))
            advisor.features = get_string_list(*v, path + ".features");
        out.push_back(std::move(advisor));
    }
    return out;
}

SelectionConfig parse_selection(const json& j) {
    check_keys(j, "selection",
               {"keep_fraction", "p_threshold", "relieff_neighbors", "importance_trees"});
    SelectionConfig out;
    if (const json* v = find(j, "keep_fraction")) out.keep_fraction = get_number(*v, "selection.keep_fraction");
    if (const json* v = find(j, "p_threshold")) out.p_threshold = get_number(*v, "selection.p_threshold");
    if (const json* v = find(j, "relieff_neighbors"))
        out.relieff_neighbors = get_count(*v, "selection.relieff_neighbors");
    if (const json* v = find(j, "importance_trees"))
        out.importance_trees = get_count(*v, "selection.importance_trees");
    return out;
}

SplitConfig parse_split(const json& j) {
    check_keys(j, "split", {"train_start", "train_end", "valid_start", "valid_end"});
    SplitConfig out;
    const json* a = find(j, "train_start");
    const json* b = find(j, "train_end");
    const json* c = find(j, "valid_start");
    const json* d = find(j, "valid_end");
    if (!a || !b || !c || !d)
        throw SchemaError("config: 'split' needs train_start, train_end, valid_start, valid_end");
    out.train_start = get_date(*a, "split.train_start");
    out.train_end = get_date(*b, "split.train_end");
    out.valid_start = get_date(*c, "split.valid_start");
    out.valid_end = get_date(*d, "split.valid_end");
    return out;
}

EnsembleConfig parse_ensemble(const json& j) {
    check_keys(j, "ensemble", {"bootstrap_samples", "sample_fraction", "stacking_folds"});
    EnsembleConfig out;
    if (const json* v = find(j, "bootstrap_samples"))
        out.bootstrap_samples = get_count(*v, "ensemble.bootstrap_samples");
    if (const json* v = find(j, "sample_fraction"))
        out.sample_fraction = get_number(*v, "ensemble.sample_fraction");
    if (const json* v = find(j, "stacking_folds"))
        out.stacking_folds = get_count(*v, "ensemble.stacking_folds");
    return out;
}

OnlineConfig parse_online(const json& j) {
    check_keys(j, "online", {"f", "gamma", "lambda", "grid_f", "grid_lambda"});
    OnlineConfig out;
    if (const json* v = find(j, "f")) out.f = get_count(*v, "online.f");
    if (const json* v = find(j, "gamma")) out.gamma = get_number(*v, "online.gamma");
    if (const json* v = find(j, "lambda")) out.lambda = get_number(*v, "online.lambda");
    if (const json* v = find(j, "grid_f")) {
        if (!v->is_array())
            throw SchemaError("config: 'online.grid_f' must be an array of integers");
        for (std::size_t i = 0; i < v->size(); ++i)
            out.grid_f.push_back(get_count((*v)[i], "online.grid_f[" + std::to_string(i) + "]"));
    }
    if (const json* v = find(j, "grid_lambda")) {
        if (!v->is_array())
            throw SchemaError("config: 'online.grid_lambda' must be an array of numbers");
        for (std::size_t i = 0; i < v->size(); ++i)
            out.grid_lambda.push_back(get_number((*v)[i], "online.grid_lambda[" + std::to_string(i) + "]"));
    }
    return out;
}

BacktestConfig parse_backtest(const json& j) {
    check_keys(j, "backtest", {"risk_free_rate", "trading_days_per_year"});
    BacktestConfig out;
    if (const json* v = find(j, "risk_free_rate"))
        out.risk_free_rate = get_number(*v, "backtest.risk_free_rate");
    if (const json* v = find(j, "trading_days_per_year"))
        out.trading_days_per_year = get_number(*v, "backtest.trading_days_per_year");
    return out;
}

}  // namespace

std::string PipelineConfig::resolved_source(std::size_t i) const {
    std::filesystem::path p(data.sources.at(i));
    if (p.is_relative() && !source_base.empty()) {
        p = (std::filesystem::path(source_base) / p).lexically_normal();
    }
    return p.string();
}

void PipelineConfig::validate() const {
    if (data.sources.empty())
        throw SchemaError("config: 'data.sources' must list at least one CSV");
    if (data.close_column.empty())
        throw SchemaError("config: 'data.close_column' is required");
    if (advisors.empty())
        throw SchemaError("config: at least one advisor is required");
    std::set<std::string> names;
    for (const AdvisorConfig& advisor : advisors) {
        if (advisor.name.empty())
            throw SchemaError("config: advisor names must be non-empty");
        if (!names.insert(advisor.name).second)
            throw SchemaError("config: duplicate advisor name '" + advisor.name + "'");
        if (advisor.features.empty())
            throw SchemaError("config: advisor '" + advisor.name + "' lists no features");
        for (const std::string& feature : advisor.features) {
            if (feature == data.close_column || feature == data.benchmark_column)
                throw SchemaError("config: advisor '" + advisor.name + "' claims price column '" +
                                  feature + "' as a feature");
        }
    }
    if (!(selection.keep_fraction > 0.0 && selection.keep_fraction <= 1.0))
        throw ParamError("config: selection.keep_fraction must be in (0, 1]");
    if (!(selection.p_threshold > 0.0 && selection.p_threshold <= 1.0))
        throw ParamError("config: selection.p_threshold must be in (0, 1]");
    if (selection.relieff_neighbors == 0)
        throw ParamError("config: selection.relieff_neighbors must be positive");
    if (selection.importance_trees == 0)
        throw ParamError("config: selection.importance_trees must be positive");
    if (!(split.train_start <= split.train_end))
        throw ParamError("config: split.train_start must not be after split.train_end");
    if (!(split.valid_start <= split.valid_end))
        throw ParamError("config: split.valid_start must not be after split.valid_end");
    if (!(split.train_end < split.valid_start))
        throw ParamError("config: training window must end before the validation window starts");
    if (ensemble.bootstrap_samples == 0)
        throw ParamError("config: ensemble.bootstrap_samples must be positive");
    if (!(ensemble.sample_fraction > 0.0 && ensemble.sample_fraction <= 1.0))
        throw ParamError("config: ensemble.sample_fraction must be in (0, 1]");
    if (ensemble.stacking_folds < 2)
        throw ParamError("config: ensemble.stacking_folds must be at least 2");
    if (online.f == 0)
        throw ParamError("config: online.f must be positive");
    if (!(online.gamma >= 0.0 && online.gamma <= 1.0))
        throw ParamError("config: online.gamma must be in [0, 1]");
    if (online.lambda < 0.0)
        throw ParamError("config: online.lambda must be non-negative");
    for (std::size_t f : online.grid_f)
        if (f == 0) throw ParamError("config: online.grid_f entries must be positive");
    for (double lambda : online.grid_lambda)
        if (lambda < 0.0) throw ParamError("config: online.grid_lambda entries must be non-negative");
    if (backtest.risk_free_rate <= -1.0)
        throw ParamError("config: backtest.risk_free_rate must exceed -1");
    if (!(backtest.trading_days_per_year > 0.0))
        throw ParamError("config: backtest.trading_days_per_year must be positive");
    if (output_dir.empty())
        throw SchemaError("config: 'output_dir' must be non-empty");
}

PipelineConfig config_from_json(const nlohmann::json& j) {
    check_keys(j, "", {"data", "preprocess", "advisors", "selection", "split", "ensemble", "online",
                       "backtest", "baselines_enabled", "seed", "output_dir"});
    PipelineConfig out;
    if (const json* v = find(j, "data")) out.data = parse_data(*v);
    if (const json* v = find(j, "preprocess")) out.preprocess = parse_preprocess(*v);
    if (const json* v = find(j, "advisors")) out.advisors = parse_advisors(*v);
    if (const json* v = find(j, "selection")) out.selection = parse_selection(*v);
    if (const json* v = find(j, "split")) out.split = parse_split(*v);
    else
        throw SchemaError("config: 'split' is required");
    if (const json* v = find(j, "ensemble")) out.ensemble = parse_ensemble(*v);
    if (const json* v = find(j, "online")) out.online = parse_online(*v);
    if (const json* v = find(j, "backtest")) out.backtest = parse_backtest(*v);
    if (const json* v = find(j, "baselines_enabled")) out.baselines_enabled = get_bool(*v, "baselines_enabled");
    if (const json* v = find(j, "seed")) {
        if (!v->is_number_integer() || v->get<long long>() < 0)
            throw SchemaError("config: 'seed' must be a non-negative integer");
        out.seed = v->get<std::uint64_t>();
    }
    if (const json* v = find(j, "output_dir")) out.output_dir = get_string(*v, "output_dir");
    out.validate();
    return out;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("config: '" + path + "' is not valid JSON: " + e.what());
    }
    PipelineConfig config = config_from_json(j);
    config.source_base = std::filesystem::path(path).parent_path().string();
    return config;
}

nlohmann::json config_to_json(const PipelineConfig& config) {
    nlohmann::json j;
    j["data"]["sources"] = config.data.sources;
    j["data"]["close_column"] = config.data.close_column;
    if (!config.data.benchmark_column.empty())
        j["data"]["benchmark_column"] = config.data.benchmark_column;
    j["preprocess"]["difference_columns"] = config.preprocess.difference_columns;
    j["preprocess"]["max_lag"] = config.preprocess.max_lag;
    j["advisors"] = nlohmann::json::array();
    for (const AdvisorConfig& advisor : config.advisors)
        j["advisors"].push_back({{"name", advisor.name}, {"features", advisor.features}});
    j["selection"]["keep_fraction"] = config.selection.keep_fraction;
    j["selection"]["p_threshold"] = config.selection.p_threshold;
    j["selection"]["relieff_neighbors"] = config.selection.relieff_neighbors;
    j["selection"]["importance_trees"] = config.selection.importance_trees;
    j["split"]["train_start"] = config.split.train_start.to_string();
    j["split"]["train_end"] = config.split.train_end.to_string();
    j["split"]["valid_start"] = config.split.valid_start.to_string();
    j["split"]["valid_end"] = config.split.valid_end.to_string();
    j["ensemble"]["bootstrap_samples"] = config.ensemble.bootstrap_samples;
    j["ensemble"]["sample_fraction"] = config.ensemble.sample_fraction;
    j["ensemble"]["stacking_folds"] = config.ensemble.stacking_folds;
    j["online"]["f"] = config.online.f;
    j["online"]["gamma"] = config.online.gamma;
    j["online"]["lambda"] = config.online.lambda;
    if (!config.online.grid_f.empty()) j["online"]["grid_f"] = config.online.grid_f;
    if (!config.online.grid_lambda.empty()) j["online"]["grid_lambda"] = config.online.grid_lambda;
    j["backtest"]["risk_free_rate"] = config.backtest.risk_free_rate;
    j["backtest"]["trading_days_per_year"] = config.backtest.trading_days_per_year;
    j["baselines_enabled"] = config.baselines_enabled;
    j["seed"] = config.seed;
    j["output_dir"] = config.output_dir;
    return j;
}

}  // namespace dynabe::pipeline
