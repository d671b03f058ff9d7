#include "dynabe/config.hpp"
#include "dynabe/errors.hpp"
#include "dynabe/io.hpp"
#include "dynabe/pipeline.hpp"

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>

namespace {

void print_selection(const dynabe::pipeline::RunArtifacts& artifacts) {
    for (const auto& advisor : artifacts.selection.advisors) {
        std::cout << "advisor " << advisor.name << " (pool " << advisor.feature_pool.size()
                  << ", kept " << advisor.selected_features.size() << "):";
        for (const std::string& name : advisor.selected_features) std::cout << " " << name;
        std::cout << "\n";
    }
}

void print_online(const dynabe::pipeline::RunArtifacts& artifacts) {
    const auto& stage = artifacts.online_stage;
    std::cout << "online: f=" << stage.f_used << " lambda=" << dynabe::format_double(stage.lambda_used)
              << " error=" << dynabe::format_double(stage.error) << " (burn-in excluded), epochs="
              << stage.result.history.epochs.size() << "\n";
    if (!stage.grid.empty()) {
        std::cout << "grid cells: " << stage.grid.size() << " (best first)\n";
        for (const auto& cell : stage.grid) {
            std::cout << "  f=" << cell.f << " lambda=" << dynabe::format_double(cell.lambda)
                      << " error=" << dynabe::format_double(cell.error) << "\n";
        }
    }
}

void print_backtest(const dynabe::pipeline::RunArtifacts& artifacts) {
    const auto& r = artifacts.backtest_stage.report;
    std::cout << "annualized return: " << dynabe::format_double(r.annualized) << "\n"
              << "stock buy-and-hold: " << dynabe::format_double(r.stock_annualized) << "\n"
              << "index buy-and-hold: " << dynabe::format_double(r.index_annualized) << "\n"
              << "excess vs stock: " << dynabe::format_double(r.excess_vs_stock) << "\n"
              << "excess vs index: " << dynabe::format_double(r.excess_vs_index) << "\n"
              << "sharpe: " << dynabe::format_double(r.sharpe) << "\n"
              << "max drawdown: " << dynabe::format_double(r.drawdown) << "\n";
}

void print_compare(const dynabe::pipeline::RunArtifacts& artifacts) {
    for (const auto& row : artifacts.comparison.rows) {
        std::cout << row.model << ": " << dynabe::format_double(row.error) << "\n";
    }
    std::cout << "note: " << artifacts.comparison.note << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"advisor-based dynamic ensemble for stock trend prediction"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string bundle_dir;
    std::uint64_t seed = 0;
    bool grid = false;

    const auto add_common = [&](CLI::App* cmd, bool with_grid) {
        cmd->add_option("-c,--config", config_path, "pipeline config file (JSON)")->required();
        cmd->add_option("-o,--out", out_dir, "output directory (default: the config's output_dir)");
        cmd->add_option("-s,--seed", seed, "master seed override");
        if (with_grid) {
            cmd->add_flag("-g,--grid", grid, "sweep the config's online (f, lambda) grid");
        }
    };

    CLI::App* ingest_cmd =
        app.add_subcommand("ingest-check", "parse, align and label the configured data, then "
                                           "print the provenance manifest");
    ingest_cmd->add_option("-c,--config", config_path, "pipeline config file (JSON)")->required();

    CLI::App* select_cmd =
        app.add_subcommand("select-features", "run hybrid feature selection per advisor");
    add_common(select_cmd, false);
    CLI::App* train_cmd = app.add_subcommand(
        "train", "build the tuned, bagged stacking ensembles and persist the agent streams");
    add_common(train_cmd, false);
    CLI::App* online_cmd =
        app.add_subcommand("online", "run the online weight update over the validation stream");
    add_common(online_cmd, true);
    CLI::App* backtest_cmd = app.add_subcommand(
        "backtest", "trade the online predictions with the naive long/flat strategy");
    add_common(backtest_cmd, true);
    CLI::App* compare_cmd =
        app.add_subcommand("compare", "score the static baselines against the online ensemble");
    add_common(compare_cmd, true);
    CLI::App* run_cmd =
        app.add_subcommand("run", "full pipeline producing a verified run bundle");
    add_common(run_cmd, true);

    CLI::App* report_cmd =
        app.add_subcommand("report", "verify a persisted run bundle and print its report");
    report_cmd->add_option("bundle", bundle_dir, "run bundle directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(report_cmd)) {
            std::cout << dynabe::pipeline::render_report(bundle_dir);
            return 0;
        }

        dynabe::pipeline::PipelineConfig config = dynabe::pipeline::load_config(config_path);
        CLI::App* active = app.get_subcommands().front();
        if (active->count("--seed") > 0) config.seed = seed;

        if (app.got_subcommand(ingest_cmd)) {
            const dynabe::pipeline::IngestResult data = dynabe::pipeline::ingest(config);
            const auto pools = dynabe::pipeline::advisor_pools(config, data.frame);
            std::cout << data.provenance.dump(2) << "\n";
            for (const auto& pool : pools) {
                std::cout << "advisor " << pool.name << ": " << pool.feature_pool.size()
                          << " candidate columns\n";
            }
            std::cout << "ok\n";
            return 0;
        }

        const std::string out = out_dir.empty() ? config.output_dir : out_dir;
        std::string last = "all";
        if (app.got_subcommand(select_cmd)) last = "selection";
        else if (app.got_subcommand(train_cmd)) last = "train";
        else if (app.got_subcommand(online_cmd)) last = "online";
        else if (app.got_subcommand(backtest_cmd)) last = "backtest";
        else if (app.got_subcommand(compare_cmd)) last = "compare";

        const dynabe::pipeline::RunArtifacts artifacts =
            dynabe::pipeline::run_and_persist(config, grid, out, last);

        if (app.got_subcommand(select_cmd)) {
            print_selection(artifacts);
        } else if (app.got_subcommand(train_cmd)) {
            for (std::size_t a = 0; a < artifacts.train.agents.agent_names.size(); ++a) {
                std::cout << artifacts.train.agents.agent_names[a] << ": "
                          << dynabe::format_double(artifacts.train.agent_errors[a]) << "\n";
            }
        } else if (app.got_subcommand(online_cmd)) {
            print_online(artifacts);
        } else if (app.got_subcommand(backtest_cmd)) {
            print_backtest(artifacts);
        } else if (app.got_subcommand(compare_cmd)) {
            print_compare(artifacts);
        } else {
            std::cout << dynabe::pipeline::render_summary(config, artifacts);
            std::cout << "\nbundle: " << out << "\n";
        }
        return 0;
    } catch (const dynabe::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
