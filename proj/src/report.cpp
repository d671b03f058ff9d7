#include "dynabe/ensemble.hpp"
#include "dynabe/errors.hpp"
#include "dynabe/frame.hpp"
#include "dynabe/io.hpp"
#include "dynabe/pipeline.hpp"

#include <filesystem>
#include <json.hpp>
#include <map>
#include <sstream>
#include <vector>

namespace dynabe::pipeline {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// Left-justified fixed-width table; widths fit the longest cell per column.
std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> widths(header.size());
    for (std::size_t j = 0; j < header.size(); ++j) widths[j] = header[j].size();
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            widths[j] = std::max(widths[j], row[j].size());
        }
    }
    std::ostringstream out;
    auto emit = [&](const std::vector<std::string>& row) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            out << row[j];
            if (j + 1 < row.size()) out << std::string(widths[j] - row[j].size() + 2, ' ');
        }
        out << "\n";
    };
    emit(header);
    for (const auto& row : rows) emit(row);
    return out.str();
}

struct PredictionLog {
    std::vector<int> predicted;
    std::vector<int> actual;
};

PredictionLog read_predictions(const std::string& path) {
    const FeatureFrame frame = read_feature_csv(path);
    PredictionLog out;
    const std::vector<double>& predicted = frame.column("predicted");
    const std::vector<double>& actual = frame.column("actual");
    for (std::size_t t = 0; t < frame.rows(); ++t) {
        out.predicted.push_back(static_cast<int>(predicted[t]));
        out.actual.push_back(static_cast<int>(actual[t]));
    }
    return out;
}

double recomputed_error(const std::vector<int>& predicted, const std::vector<int>& actual,
                        std::size_t burnin) {
    std::size_t wrong = 0;
    for (std::size_t t = burnin; t < predicted.size(); ++t) {
        if (predicted[t] != actual[t]) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(predicted.size() - burnin);
}

std::string advisor_of(const std::string& agent_name) {
    const std::size_t slash = agent_name.rfind('/');
    return slash == std::string::npos ? agent_name : agent_name.substr(0, slash);
}

std::string stacker_of(const std::string& agent_name) {
    const std::size_t slash = agent_name.rfind('/');
    return slash == std::string::npos ? agent_name : agent_name.substr(slash + 1);
}

}  // namespace

std::string render_report(const std::string& bundle_dir) {
    const fs::path root(bundle_dir);
    if (!fs::exists(root / "manifest.json")) {
        throw IntegrityError("no manifest.json under '" + bundle_dir + "'; not a run bundle");
    }
    verify_checksums(bundle_dir);

    json manifest;
    try {
        manifest = json::parse(read_text_file((root / "manifest.json").string()));
    } catch (const json::parse_error& e) {
        throw IntegrityError(std::string("manifest.json is not valid JSON: ") + e.what());
    }
    if (manifest.value("status", "") != "ok") {
        throw IntegrityError("bundle records a failed run: " +
                             manifest.value("error", std::string("unknown error")));
    }

    std::ostringstream out;
    out << "run report\n==========\nchecksums: ok\n";

    // [1] what each advisor kept.
    out << "\n[1] selected features\n";
    const json& selected = manifest.at("selected_features");
    for (const auto& [advisor, entry] : selected.items()) {
        out << advisor << " (pool " << entry.at("pool_size").get<std::size_t>() << "):";
        for (const json& name : entry.at("selected")) out << " " << name.get<std::string>();
        out << "\n";
    }

    // [2] advisor x stacker validation errors, recomputed from the persisted
    // agent streams and cross-checked against the manifest.
    out << "\n[2] stacking validation errors\n";
    const ensemble::AgentMatrix agents =
        ensemble::read_agent_matrix_csv((root / "train" / "agents.csv").string());
    const PredictionLog log = read_predictions((root / "online" / "predictions.csv").string());
    if (log.actual.size() != static_cast<std::size_t>(agents.classes.rows())) {
        throw IntegrityError("agents.csv and predictions.csv disagree on validation length");
    }
    const json& reported_errors = manifest.at("results").at("agent_errors");
    std::vector<std::string> advisors;  // first-seen order
    std::map<std::string, std::map<std::string, double>> table;
    for (std::size_t a = 0; a < agents.agent_names.size(); ++a) {
        std::size_t wrong = 0;
        for (std::size_t t = 0; t < log.actual.size(); ++t) {
            if (agents.classes(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(a)) !=
                log.actual[t]) {
                ++wrong;
            }
        }
        const double error = static_cast<double>(wrong) / static_cast<double>(log.actual.size());
        const std::string& name = agents.agent_names[a];
        if (!reported_errors.contains(name) || reported_errors.at(name).get<double>() != error) {
            throw IntegrityError("manifest error for agent '" + name +
                                 "' does not match the persisted predictions");
        }
        const std::string advisor = advisor_of(name);
        if (!table.count(advisor)) advisors.push_back(advisor);
        table[advisor][stacker_of(name)] = error;
    }
    std::vector<std::string> header{"advisor"};
    for (ensemble::Stacker stacker : ensemble::kStackerOrder) {
        header.push_back(ensemble::to_string(stacker));
    }
    std::vector<std::vector<std::string>> rows;
    for (const std::string& advisor : advisors) {
        std::vector<std::string> row{advisor};
        for (ensemble::Stacker stacker : ensemble::kStackerOrder) {
            row.push_back(format_double(table[advisor][ensemble::to_string(stacker)]));
        }
        rows.push_back(std::move(row));
    }
    out << render_table(header, rows);

    // [3] online errors, recomputed from the prediction log.
    out << "\n[3] online update errors\n";
    const json& protocol = manifest.at("protocol");
    const json& results = manifest.at("results");
    const std::size_t f = protocol.at("f").get<std::size_t>();
    const double reported = results.at("online_error").get<double>();
    if (recomputed_error(log.predicted, log.actual, f) != reported) {
        throw IntegrityError("manifest online error does not match the persisted predictions");
    }
    out << "f=" << f << " gamma=" << format_double(protocol.at("gamma").get<double>())
        << " lambda=" << format_double(protocol.at("lambda").get<double>()) << ": "
        << format_double(reported) << " (burn-in excluded)\n";
    out << "epochs: " << results.at("epochs").get<std::size_t>() << "\n";
    if (results.contains("grid")) {
        std::map<std::size_t, std::map<double, double>> grid;  // f -> lambda -> error
        std::map<double, bool> lambdas;
        for (const json& cell : results.at("grid")) {
            grid[cell.at("f").get<std::size_t>()][cell.at("lambda").get<double>()] =
                cell.at("error").get<double>();
            lambdas[cell.at("lambda").get<double>()] = true;
        }
        std::vector<std::string> grid_header{"f \\ lambda"};
        for (const auto& [lambda, _] : lambdas) grid_header.push_back(format_double(lambda));
        std::vector<std::vector<std::string>> grid_rows;
        for (const auto& [f_value, by_lambda] : grid) {
            std::vector<std::string> row{std::to_string(f_value)};
            for (const auto& [lambda, _] : lambdas) {
                auto it = by_lambda.find(lambda);
                row.push_back(it == by_lambda.end() ? "-" : format_double(it->second));
            }
            grid_rows.push_back(std::move(row));
        }
        out << render_table(grid_header, grid_rows);
    }

    // [4] static baselines against the online ensemble.
    out << "\n[4] model comparison\n";
    if (results.contains("comparison")) {
        for (const json& row : results.at("comparison").at("rows")) {
            out << row.at("model").get<std::string>() << ": "
                << format_double(row.at("error").get<double>()) << "\n";
        }
        out << "note: " << results.at("comparison").at("note").get<std::string>() << "\n";
    } else {
        out << "skipped\n";
    }

    // [5] trading metrics.
    out << "\n[5] backtest\n";
    const json& bt = results.at("backtest");
    out << "annualized return: " << format_double(bt.at("annualized").get<double>()) << "\n";
    out << "stock buy-and-hold: " << format_double(bt.at("stock_annualized").get<double>())
        << "\n";
    out << "index buy-and-hold: " << format_double(bt.at("index_annualized").get<double>())
        << "\n";
    out << "excess vs stock: " << format_double(bt.at("excess_vs_stock").get<double>()) << "\n";
    out << "excess vs index: " << format_double(bt.at("excess_vs_index").get<double>()) << "\n";
    out << "sharpe: " << format_double(bt.at("sharpe").get<double>()) << "\n";
    out << "max drawdown: " << format_double(bt.at("max_drawdown").get<double>()) << "\n";
    return out.str();
}

}  // namespace dynabe::pipeline
