#include <doctest.h>

#include "dynabe/config.hpp"
#include "dynabe/errors.hpp"
#include "dynabe/io.hpp"
#include "dynabe/pipeline.hpp"
#include "dynabe/rng.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace dynabe;
using namespace dynabe::pipeline;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / "dynabe_cli_tests" / tag;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
    std::ofstream out(path);
    for (const std::string& line : lines) out << line << "\n";
}

std::vector<Date> day_sequence(std::size_t n) {
    std::vector<Date> dates;
    Date d{2023, 1, 1};
    for (std::size_t i = 0; i < n; ++i) {
        dates.push_back(d);
        ++d.day;
        if (d.day > 28) {
            d.day = 1;
            ++d.month;
            if (d.month > 12) {
                d.month = 1;
                ++d.year;
            }
        }
    }
    return dates;
}

bool message_contains(const std::function<void()>& fn, const std::string& needle) {
    try {
        fn();
    } catch (const Error& e) {
        return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
}

/// Two-source synthetic market: per-advisor signal columns encode the next
/// close move, noise columns do not. Returns (market.csv, macro.csv) paths.
struct Fixture {
    fs::path dir;
    fs::path config_path;
    std::size_t n_days;
};

Fixture make_fixture(const std::string& tag, std::size_t n_days, const json& overrides) {
    Fixture fx;
    fx.dir = fresh_dir(tag);
    fx.n_days = n_days;

    Rng rng(415);
    const std::vector<Date> dates = day_sequence(n_days);
    std::vector<int> dir_up(n_days - 1);
    for (std::size_t t = 0; t + 1 < n_days; ++t) dir_up[t] = rng.bernoulli(0.5) ? 1 : 0;

    std::vector<double> close(n_days);
    close[0] = 100.0;
    for (std::size_t t = 0; t + 1 < n_days; ++t) {
        const double step = (dir_up[t] == 1 ? 1.0 : -1.0) * (0.4 + 0.3 * rng.uniform());
        close[t + 1] = close[t] + step;
    }

    std::vector<std::string> market{"date,close,sig_a,noise_a"};
    std::vector<std::string> macro{"date,sig_b,noise_b,bench"};
    for (std::size_t t = 0; t < n_days; ++t) {
        const double signal = t + 1 < n_days ? (dir_up[t] == 1 ? 1.0 : -1.0) : 0.0;
        market.push_back(dates[t].to_string() + "," + format_double(close[t]) + "," +
                         format_double(signal + 0.1 * rng.normal()) + "," +
                         format_double(rng.normal()));
        macro.push_back(dates[t].to_string() + "," + format_double(signal + 0.1 * rng.normal()) +
                        "," + format_double(rng.normal()) + "," +
                        format_double(50.0 + 0.2 * static_cast<double>(t)));
    }
    write_lines(fx.dir / "market.csv", market);
    write_lines(fx.dir / "macro.csv", macro);

    // Last 21 calendar days validate, everything earlier trains.
    const std::size_t boundary = n_days - 22;
    json config = {
        {"data",
         {{"sources", {"market.csv", "macro.csv"}},
          {"close_column", "close"},
          {"benchmark_column", "bench"}}},
        {"preprocess", {{"difference_columns", {"noise_a"}}, {"max_lag", 2}}},
        {"advisors",
         {{{"name", "tech"}, {"features", {"sig_a", "noise_a"}}},
          {{"name", "macro"}, {"features", {"sig_b", "noise_b"}}}}},
        {"selection", {{"keep_fraction", 0.2}}},
        {"split",
         {{"train_start", dates.front().to_string()},
          {"train_end", dates[boundary].to_string()},
          {"valid_start", dates[boundary + 1].to_string()},
          {"valid_end", dates.back().to_string()}}},
        {"ensemble", {{"bootstrap_samples", 2}, {"sample_fraction", 0.9}, {"stacking_folds", 3}}},
        {"online", {{"f", 3}, {"gamma", 0.8}, {"lambda", 0.0}}},
        {"backtest", {{"risk_free_rate", 0.02}}},
        {"baselines_enabled", false},
        {"seed", 611},
        {"output_dir", (fx.dir / "out").string()},
    };
    for (const auto& [key, value] : overrides.items()) config[key] = value;
    fx.config_path = fx.dir / "config.json";
    write_lines(fx.config_path, {config.dump(2)});
    return fx;
}

}  // namespace

TEST_CASE("config parses full documents and applies defaults") {
    const json full = {
        {"data",
         {{"sources", {"a.csv", "b.csv"}},
          {"close_column", "close"},
          {"benchmark_column", "index"}}},
        {"preprocess", {{"difference_columns", {"m2"}}, {"max_lag", 3}}},
        {"advisors", {{{"name", "macro"}, {"features", {"m1", "m2"}}}}},
        {"selection",
         {{"keep_fraction", 0.25},
          {"p_threshold", 0.4},
          {"relieff_neighbors", 7},
          {"importance_trees", 50}}},
        {"split",
         {{"train_start", "2020-01-01"},
          {"train_end", "2020-06-30"},
          {"valid_start", "2020-07-01"},
          {"valid_end", "2020-12-31"}}},
        {"ensemble", {{"bootstrap_samples", 4}, {"sample_fraction", 0.5}, {"stacking_folds", 4}}},
        {"online",
         {{"f", 7}, {"gamma", 0.5}, {"lambda", 2.0}, {"grid_f", {2, 3}}, {"grid_lambda", {0.0, 1.0}}}},
        {"backtest", {{"risk_free_rate", 0.01}, {"trading_days_per_year", 252}}},
        {"baselines_enabled", false},
        {"seed", 99},
        {"output_dir", "runs/x"},
    };
    const PipelineConfig config = config_from_json(full);
    CHECK(config.data.sources == std::vector<std::string>{"a.csv", "b.csv"});
    CHECK(config.data.close_column == "close");
    CHECK(config.data.benchmark_column == "index");
    CHECK(config.preprocess.difference_columns == std::set<std::string>{"m2"});
    CHECK(config.preprocess.max_lag == 3);
    REQUIRE(config.advisors.size() == 1);
    CHECK(config.advisors[0].name == "macro");
    CHECK(config.advisors[0].features == std::vector<std::string>{"m1", "m2"});
    CHECK(config.selection.keep_fraction == 0.25);
    CHECK(config.selection.p_threshold == 0.4);
    CHECK(config.selection.relieff_neighbors == 7);
    CHECK(config.selection.importance_trees == 50);
    CHECK(config.split.train_start == Date{2020, 1, 1});
    CHECK(config.split.valid_end == Date{2020, 12, 31});
    CHECK(config.ensemble.bootstrap_samples == 4);
    CHECK(config.ensemble.sample_fraction == 0.5);
    CHECK(config.ensemble.stacking_folds == 4);
    CHECK(config.online.f == 7);
    CHECK(config.online.gamma == 0.5);
    CHECK(config.online.lambda == 2.0);
    CHECK(config.online.grid_f == std::vector<std::size_t>{2, 3});
    CHECK(config.online.grid_lambda == std::vector<double>{0.0, 1.0});
    CHECK(config.backtest.risk_free_rate == 0.01);
    CHECK(config.backtest.trading_days_per_year == 252);
    CHECK_FALSE(config.baselines_enabled);
    CHECK(config.seed == 99);
    CHECK(config.output_dir == "runs/x");

    // Round trip through the echo used in manifests.
    const PipelineConfig again = config_from_json(config_to_json(config));
    CHECK(again.data.sources == config.data.sources);
    CHECK(again.online.grid_f == config.online.grid_f);
    CHECK(again.seed == config.seed);

    const json minimal = {
        {"data", {{"sources", {"a.csv"}}, {"close_column", "close"}}},
        {"advisors", {{{"name", "solo"}, {"features", {"x"}}}}},
        {"split",
         {{"train_start", "2020-01-01"},
          {"train_end", "2020-06-30"},
          {"valid_start", "2020-07-01"},
          {"valid_end", "2020-12-31"}}},
    };
    const PipelineConfig defaults = config_from_json(minimal);
    CHECK(defaults.preprocess.max_lag == 5);
    CHECK(defaults.preprocess.difference_columns.empty());
    CHECK(defaults.selection.keep_fraction == 0.2);
    CHECK(defaults.selection.p_threshold == 0.5);
    CHECK(defaults.ensemble.bootstrap_samples == 10);
    CHECK(defaults.ensemble.sample_fraction == 0.8);
    CHECK(defaults.ensemble.stacking_folds == 5);
    CHECK(defaults.online.f == 5);
    CHECK(defaults.online.gamma == 0.8);
    CHECK(defaults.online.lambda == 0.0);
    CHECK(defaults.backtest.risk_free_rate == 0.0);
    CHECK(defaults.backtest.trading_days_per_year == 250.0);
    CHECK(defaults.baselines_enabled);
    CHECK(defaults.seed == 1);
    CHECK(defaults.data.benchmark_column.empty());
}

TEST_CASE("unknown config keys are hard errors naming the path") {
    json base = {
        {"data", {{"sources", {"a.csv"}}, {"close_column", "close"}}},
        {"advisors", {{{"name", "solo"}, {"features", {"x"}}}}},
        {"split",
         {{"train_start", "2020-01-01"},
          {"train_end", "2020-06-30"},
          {"valid_start", "2020-07-01"},
          {"valid_end", "2020-12-31"}}},
    };

    json top = base;
    top["advisers"] = json::array();
    CHECK(message_contains([&] { config_from_json(top); }, "'advisers'"));

    json nested = base;
    nested["online"] = {{"gama", 0.8}};
    CHECK(message_contains([&] { config_from_json(nested); }, "'online.gama'"));

    json advisor = base;
    advisor["advisors"][0]["feature"] = json::array();
    CHECK(message_contains([&] { config_from_json(advisor); }, "'advisors[0].feature'"));

    json wrong_type = base;
    wrong_type["seed"] = "abc";
    CHECK_THROWS_AS(config_from_json(wrong_type), SchemaError);
}

TEST_CASE("config validation rejects out-of-range and inconsistent settings") {
    const json base = {
        {"data", {{"sources", {"a.csv"}}, {"close_column", "close"}}},
        {"advisors", {{{"name", "solo"}, {"features", {"x"}}}}},
        {"split",
         {{"train_start", "2020-01-01"},
          {"train_end", "2020-06-30"},
          {"valid_start", "2020-07-01"},
          {"valid_end", "2020-12-31"}}},
    };
    const auto with = [&](const std::string& pointer, const json& value) {
        json j = base;
        j[json::json_pointer(pointer)] = value;
        return j;
    };

    CHECK_THROWS_AS(config_from_json(with("/data/sources", json::array())), SchemaError);
    CHECK_THROWS_AS(config_from_json(with("/data/close_column", "")), SchemaError);
    CHECK_THROWS_AS(config_from_json(with("/advisors", json::array())), SchemaError);
    CHECK_THROWS_AS(config_from_json(with("/selection/keep_fraction", 0.0)), ParamError);
    CHECK_THROWS_AS(config_from_json(with("/selection/keep_fraction", 1.5)), ParamError);
    CHECK_THROWS_AS(config_from_json(with("/ensemble/bootstrap_samples", 0)), ParamError);
    CHECK_THROWS_AS(config_from_json(with("/ensemble/sample_fraction", 1.2)), ParamError);
    CHECK_THROWS_AS(config_from_json(with("/ensemble/stacking_folds", 1)), ParamError);
    CHECK_THROWS_AS(config_from_json(with("/online/f", 0)), ParamError);
    CHECK_THROWS_AS(config_from_json(with("/online/gamma", 1.5)), ParamError);
    CHECK_THROWS_AS(config_from_json(with("/online/lambda", -1.0)), ParamError);
    CHECK_THROWS_AS(config_from_json(with("/backtest/trading_days_per_year", 0.0)), ParamError);
    CHECK_THROWS_AS(config_from_json(with("/split/valid_start", "2020-05-01")), ParamError);
    CHECK_THROWS_AS(config_from_json(with("/output_dir", "")), SchemaError);

    // Duplicate advisor names and price columns claimed as features.
    json dup = base;
    dup["advisors"].push_back(dup["advisors"][0]);
    CHECK_THROWS_AS(config_from_json(dup), SchemaError);
    json grab = base;
    grab["advisors"][0]["features"].push_back("close");
    CHECK_THROWS_AS(config_from_json(grab), SchemaError);
}

TEST_CASE("load_config keeps sources as written and records the config directory") {
    const fs::path dir = fresh_dir("load_config");
    const json config = {
        {"data", {{"sources", {"data/a.csv"}}, {"close_column", "close"}}},
        {"advisors", {{{"name", "solo"}, {"features", {"x"}}}}},
        {"split",
         {{"train_start", "2020-01-01"},
          {"train_end", "2020-06-30"},
          {"valid_start", "2020-07-01"},
          {"valid_end", "2020-12-31"}}},
    };
    write_lines(dir / "config.json", {config.dump()});
    const PipelineConfig loaded = load_config((dir / "config.json").string());
    CHECK(loaded.data.sources[0] == "data/a.csv");
    CHECK(loaded.source_base == dir.string());
    CHECK(loaded.resolved_source(0) == (dir / "data" / "a.csv").lexically_normal().string());

    write_lines(dir / "broken.json", {"{ not json"});
    CHECK_THROWS_AS(load_config((dir / "broken.json").string()), SchemaError);
    CHECK_THROWS_AS(load_config((dir / "missing.json").string()), DataError);
}

TEST_CASE("ingest matches the row-counting oracle on overlapping calendars") {
    const fs::path dir = fresh_dir("counting");
    const std::size_t max_lag = 3;
    const std::vector<Date> all = day_sequence(20);
    std::vector<std::string> a{"date,close,a"};
    std::vector<std::string> b{"date,b"};
    for (std::size_t t = 0; t < all.size(); ++t) {
        a.push_back(all[t].to_string() + "," + format_double(100.0 + 3.0 * ((t * 7) % 5)) + "," +
                    format_double(static_cast<double>(t % 4)));
        if (t >= 2) {
            b.push_back(all[t].to_string() + "," + format_double(static_cast<double>((t * 3) % 7)));
        }
    }
    write_lines(dir / "a.csv", a);
    write_lines(dir / "b.csv", b);

    // Test-side oracle: shared calendar, then one row per preprocessing step.
    std::size_t intersection = 0;
    for (std::size_t t = 0; t < all.size(); ++t) {
        if (t >= 2) ++intersection;
    }
    const std::size_t expected_labeled = intersection - 1 - max_lag - 1;

    const json config_json = {
        {"data", {{"sources", {"a.csv", "b.csv"}}, {"close_column", "close"}}},
        {"preprocess", {{"difference_columns", {"a"}}, {"max_lag", max_lag}}},
        {"advisors", {{{"name", "solo"}, {"features", {"a", "b"}}}}},
        {"split",
         {{"train_start", "2023-01-01"},
          {"train_end", "2023-01-14"},
          {"valid_start", "2023-01-15"},
          {"valid_end", "2023-01-20"}}},
    };
    const fs::path config_path = dir / "config.json";
    write_lines(config_path, {config_json.dump()});
    const PipelineConfig config = load_config(config_path.string());
    const IngestResult data = ingest(config);

    CHECK(data.provenance["aligned_rows"] == intersection);
    CHECK(data.provenance["after_difference_rows"] == intersection - 1);
    CHECK(data.provenance["after_lag_rows"] == intersection - 1 - max_lag);
    CHECK(data.provenance["labeled_rows"] == expected_labeled);
    CHECK(data.labels.size() == expected_labeled);
    CHECK(data.frame.rows() == expected_labeled + 1);
    CHECK(data.provenance["dropped"]["differencing"] == 1);
    CHECK(data.provenance["dropped"]["lags"] == max_lag);
    CHECK(data.provenance["dropped"]["label"] == 1);
    CHECK(data.split.train_rows.size() + data.split.valid_rows.size() == expected_labeled);

    // Lag columns materialized for every feature, close kept raw.
    CHECK(data.frame.has_column("a_3"));
    CHECK(data.frame.has_column("b_1"));
    CHECK(data.frame.is_feature("a"));
    CHECK_FALSE(data.frame.is_feature("close"));
}

TEST_CASE("ingest and advisor pools name missing columns") {
    const Fixture fx = make_fixture("missing_columns", 40, json::object());
    PipelineConfig config = load_config(fx.config_path.string());

    PipelineConfig typo = config;
    typo.advisors[0].features = {"sig_a", "sig_typo"};
    CHECK(message_contains(
        [&] {
            const IngestResult data = ingest(typo);
            advisor_pools(typo, data.frame);
        },
        "'sig_typo'"));

    PipelineConfig bad_close = config;
    bad_close.data.close_column = "closing";
    CHECK_THROWS_AS(ingest(bad_close), SchemaError);

    PipelineConfig bad_diff = config;
    bad_diff.preprocess.difference_columns = {"nope"};
    CHECK(message_contains([&] { ingest(bad_diff); }, "'nope'"));
}

TEST_CASE("advisor pools expand each base feature into its lag columns") {
    const Fixture fx = make_fixture("pools", 40, json::object());
    const PipelineConfig config = load_config(fx.config_path.string());
    const IngestResult data = ingest(config);
    const auto pools = advisor_pools(config, data.frame);
    REQUIRE(pools.size() == 2);
    CHECK(pools[0].name == "tech");
    CHECK(pools[0].feature_pool ==
          std::vector<std::string>{"sig_a", "sig_a_1", "sig_a_2", "noise_a", "noise_a_1",
                                   "noise_a_2"});
    CHECK(pools[1].feature_pool ==
          std::vector<std::string>{"sig_b", "sig_b_1", "sig_b_2", "noise_b", "noise_b_1",
                                   "noise_b_2"});
}

TEST_CASE("run_and_persist writes a complete verified bundle") {
    const Fixture fx = make_fixture("bundle", 75, json::object());
    const PipelineConfig config = load_config(fx.config_path.string());
    const fs::path out = fx.dir / "out";
    const RunArtifacts artifacts = run_and_persist(config, false, out.string());

    for (const char* relative :
         {"manifest.json", "summary.txt", "timings.log", "checksums.txt", "ingest/dataset.csv",
          "ingest/labels.csv", "selection/tech.csv", "selection/macro.csv", "train/agents.csv",
          "train/tuning.csv", "train/agent_errors.csv", "online/predictions.csv",
          "online/weights.csv", "online/accuracy.csv", "backtest/curve.csv",
          "backtest/metrics.csv"}) {
        CAPTURE(relative);
        CHECK(fs::exists(out / relative));
    }
    CHECK_FALSE(fs::exists(out / "compare"));

    const json manifest = json::parse(read_text_file((out / "manifest.json").string()));
    CHECK(manifest["status"] == "ok");
    CHECK(manifest["protocol"]["n_advisors"] == 2);
    CHECK(manifest["protocol"]["n_agents"] == 8);
    CHECK(manifest["protocol"]["bootstrap_samples"] == 2);
    CHECK(manifest["protocol"]["stacking_folds"] == 3);
    CHECK(manifest["protocol"]["gamma"] == 0.8);
    CHECK(manifest["protocol"]["stackers"] ==
          json::array({"LOGISTIC", "XGBOOST", "ROTFOREST", "AVERAGED"}));
    CHECK(manifest["results"]["online_error"].get<double>() == artifacts.online_stage.error);
    CHECK(manifest["results"]["agent_errors"].size() == 8);
    CHECK(manifest["stages"] ==
          json::array({"ingest", "selection", "train", "online", "backtest"}));

    CHECK_NOTHROW(verify_checksums(out.string()));

    const std::string report = render_report(out.string());
    for (const char* marker :
         {"[1] selected features", "[2] stacking validation errors", "[3] online update errors",
          "[4] model comparison", "[5] backtest"}) {
        CAPTURE(marker);
        CHECK(report.find(marker) != std::string::npos);
    }
    CHECK(report.find("skipped") != std::string::npos);

    const std::string summary = read_text_file((out / "summary.txt").string());
    CHECK(summary.find("selected features") != std::string::npos);
    CHECK(summary.find("chosen hyperparameters") != std::string::npos);
    CHECK(summary.find("tech/elastic_linear") != std::string::npos);

    // Tampering with any persisted result must be caught.
    const fs::path victim = out / "online" / "predictions.csv";
    const std::string original = read_text_file(victim.string());
    write_text_file(victim.string(), original + "2023-12-31,1,1\n");
    CHECK_THROWS_AS(verify_checksums(out.string()), IntegrityError);
    CHECK_THROWS_AS(render_report(out.string()), IntegrityError);
    write_text_file(victim.string(), original);
    CHECK_NOTHROW(verify_checksums(out.string()));

    write_text_file((out / "stray.txt").string(), "left behind\n");
    CHECK_THROWS_AS(verify_checksums(out.string()), IntegrityError);
    fs::remove(out / "stray.txt");
    fs::remove(out / "backtest" / "metrics.csv");
    CHECK_THROWS_AS(verify_checksums(out.string()), IntegrityError);
}

TEST_CASE("pipeline runs are bitwise reproducible per seed") {
    const Fixture fx = make_fixture("determinism", 70, json::object());
    PipelineConfig config = load_config(fx.config_path.string());
    const RunArtifacts first = run_pipeline(config, false);
    const RunArtifacts second = run_pipeline(config, false);

    REQUIRE(first.train.agents.scores.size() == second.train.agents.scores.size());
    CHECK((first.train.agents.scores.array() == second.train.agents.scores.array()).all());
    CHECK((first.train.agents.classes.array() == second.train.agents.classes.array()).all());
    CHECK(first.online_stage.error == second.online_stage.error);
    CHECK(render_summary(config, first) == render_summary(config, second));

    PipelineConfig other = config;
    other.seed = config.seed + 1;
    const RunArtifacts third = run_pipeline(other, false);
    CHECK_FALSE((first.train.agents.scores.array() == third.train.agents.scores.array()).all());
}

TEST_CASE("grid mode sweeps the full cartesian grid") {
    const Fixture fx = make_fixture(
        "grid", 70,
        {{"online",
          {{"f", 3}, {"gamma", 0.8}, {"lambda", 0.0}, {"grid_f", {2, 3, 5}},
           {"grid_lambda", {0.0, 1.0, 31.0}}}}});
    const PipelineConfig config = load_config(fx.config_path.string());
    const fs::path out = fx.dir / "out_grid";
    const RunArtifacts artifacts = run_and_persist(config, true, out.string());

    CHECK(artifacts.grid_mode);
    REQUIRE(artifacts.online_stage.grid.size() == 9);
    CHECK(artifacts.online_stage.f_used == artifacts.online_stage.grid.front().f);
    CHECK(artifacts.online_stage.lambda_used == artifacts.online_stage.grid.front().lambda);

    const json manifest = json::parse(read_text_file((out / "manifest.json").string()));
    CHECK(manifest["results"]["grid"].size() == 9);
    CHECK(manifest["grid_mode"] == true);

    std::istringstream grid_csv(read_text_file((out / "online" / "grid.csv").string()));
    std::string line;
    std::size_t lines = 0;
    while (std::getline(grid_csv, line)) {
        if (!line.empty()) ++lines;
    }
    CHECK(lines == 10);  // header + 9 cells

    const std::string report = render_report(out.string());
    CHECK(report.find("f \\ lambda") != std::string::npos);

    // Grid mode without grid lists in the config is refused.
    const Fixture bare = make_fixture("grid_missing", 70, json::object());
    const PipelineConfig bare_config = load_config(bare.config_path.string());
    CHECK_THROWS_AS(run_pipeline(bare_config, true), PipelineError);
}

TEST_CASE("stage failures persist partial outputs and name the stage") {
    const Fixture fx = make_fixture(
        "stage_failure", 70,
        {{"online", {{"f", 60}, {"gamma", 0.8}, {"lambda", 0.0}}}});
    const PipelineConfig config = load_config(fx.config_path.string());
    const fs::path out = fx.dir / "out_fail";
    CHECK(message_contains([&] { run_and_persist(config, false, out.string()); },
                           "stage 'online'"));

    CHECK(fs::exists(out / "ingest" / "dataset.csv"));
    CHECK(fs::exists(out / "train" / "agents.csv"));
    CHECK(fs::exists(out / "checksums.txt"));
    const json manifest = json::parse(read_text_file((out / "manifest.json").string()));
    CHECK(manifest["status"] == "failed");
    CHECK(manifest["stages"] == json::array({"ingest", "selection", "train"}));
    CHECK(manifest["error"].get<std::string>().find("stage 'online'") != std::string::npos);
}

TEST_CASE("run_and_persist stops after the requested stage") {
    const Fixture fx = make_fixture("partial", 70, json::object());
    const PipelineConfig config = load_config(fx.config_path.string());
    const fs::path out = fx.dir / "out_sel";
    run_and_persist(config, false, out.string(), "selection");
    CHECK(fs::exists(out / "selection" / "tech.csv"));
    CHECK_FALSE(fs::exists(out / "train"));
    CHECK_FALSE(fs::exists(out / "manifest.json"));

    CHECK_THROWS_AS(run_and_persist(config, false, out.string(), "bogus"), ParamError);
}

TEST_CASE("checksum helpers cover exactly the non-exempt files") {
    const fs::path dir = fresh_dir("checksums");
    write_text_file((dir / "x.txt").string(), "alpha\n");
    fs::create_directories(dir / "sub");
    write_text_file((dir / "sub" / "y.csv").string(), "h\n1\n");
    write_text_file((dir / "timings.log").string(), "varies\n");
    write_checksums(dir.string());
    CHECK_NOTHROW(verify_checksums(dir.string()));

    // timings.log may change freely.
    write_text_file((dir / "timings.log").string(), "changed\n");
    CHECK_NOTHROW(verify_checksums(dir.string()));

    write_text_file((dir / "x.txt").string(), "beta\n");
    CHECK_THROWS_AS(verify_checksums(dir.string()), IntegrityError);
    write_text_file((dir / "x.txt").string(), "alpha\n");

    fs::remove(dir / "sub" / "y.csv");
    CHECK_THROWS_AS(verify_checksums(dir.string()), IntegrityError);

    CHECK_THROWS_AS(verify_checksums((dir / "nowhere").string()), IntegrityError);
}
