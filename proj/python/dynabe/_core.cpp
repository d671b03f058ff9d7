#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dynabe/backtest.hpp"
#include "dynabe/config.hpp"
#include "dynabe/ensemble.hpp"
#include "dynabe/errors.hpp"
#include "dynabe/feature_selection.hpp"
#include "dynabe/online_update.hpp"
#include "dynabe/pipeline.hpp"
#include "dynabe/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace dynabe;

namespace {

py::object json_to_py(const nlohmann::json& j) {
    switch (j.type()) {
        case nlohmann::json::value_t::null:
            return py::none();
        case nlohmann::json::value_t::boolean:
            return py::bool_(j.get<bool>());
        case nlohmann::json::value_t::number_integer:
            return py::int_(j.get<std::int64_t>());
        case nlohmann::json::value_t::number_unsigned:
            return py::int_(j.get<std::uint64_t>());
        case nlohmann::json::value_t::number_float:
            return py::float_(j.get<double>());
        case nlohmann::json::value_t::string:
            return py::str(j.get<std::string>());
        case nlohmann::json::value_t::array: {
            py::list out;
            for (const auto& item : j) out.append(json_to_py(item));
            return out;
        }
        case nlohmann::json::value_t::object: {
            py::dict out;
            for (const auto& [key, value] : j.items()) {
                out[py::str(key)] = json_to_py(value);
            }
            return out;
        }
        default:
            return py::none();
    }
}

std::vector<Date> sequential_dates(std::size_t n) {
    std::vector<Date> dates;
    dates.reserve(n);
    Date d{2020, 1, 1};
    for (std::size_t i = 0; i < n; ++i) {
        dates.push_back(d);
        if (d.day < 28) {
            ++d.day;
        } else {
            d.day = 1;
            if (d.month < 12) {
                ++d.month;
            } else {
                d.month = 1;
                ++d.year;
            }
        }
    }
    return dates;
}

py::dict read_manifest(const std::string& out_dir) {
    const auto path = std::filesystem::path(out_dir) / "manifest.json";
    std::ifstream in(path);
    if (!in) throw DataError("no manifest at '" + path.string() + "'");
    nlohmann::json manifest;
    in >> manifest;
    return py::cast<py::dict>(json_to_py(manifest));
}

py::dict run_bundle(const std::string& config_path, const std::string& out_dir,
                    py::object seed, bool grid, const std::string& last_stage) {
    pipeline::PipelineConfig config = pipeline::load_config(config_path);
    if (!seed.is_none()) config.seed = py::cast<std::uint64_t>(seed);
    pipeline::run_and_persist(config, grid, out_dir, last_stage);
    return read_manifest(out_dir);
}

py::tuple online_update_py(const Eigen::MatrixXi& classes, const std::vector<int>& truth,
                           std::size_t f, double gamma, double lambda) {
    if (static_cast<std::size_t>(classes.rows()) != truth.size()) {
        throw ParamError("classes and truth must cover the same days");
    }
    ensemble::AgentMatrix agents;
    agents.dates = sequential_dates(truth.size());
    agents.classes = classes;
    agents.scores = classes.cast<double>();
    for (Eigen::Index a = 0; a < classes.cols(); ++a) {
        agents.agent_names.push_back("agent" + std::to_string(a) + "/STREAM");
    }
    const TrendLabels labels{agents.dates, truth};
    const auto result = online_update(agents, labels, online::OnlineParams{f, gamma, lambda});

    const auto epochs = static_cast<Eigen::Index>(result.history.epochs.size());
    Eigen::MatrixXd weights(epochs, classes.cols());
    for (Eigen::Index e = 0; e < epochs; ++e) {
        weights.row(e) = result.history.epochs[static_cast<std::size_t>(e)].weights;
    }
    return py::make_tuple(result.predictions, weights);
}

std::vector<std::string> select_features_py(const Eigen::MatrixXd& X,
                                            const std::vector<std::string>& names,
                                            const Eigen::VectorXd& y, double keep_fraction,
                                            std::uint64_t seed, double p_threshold,
                                            std::size_t k_neighbors, int n_trees) {
    return selection::run_hybrid_selection(X, names, y, keep_fraction, seed, p_threshold,
                                           k_neighbors, n_trees)
        .selected;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "advisor-based dynamic ensemble for stock trend prediction";
    m.attr("__version__") = "0.1.0";

    py::register_exception<Error>(m, "DynabeError");

    m.def("run", &run_bundle, py::arg("config_path"), py::arg("out_dir"),
          py::arg("seed") = py::none(), py::arg("grid") = false,
          py::arg("last_stage") = "all",
          "Run the pipeline from a config file, persist the bundle under out_dir "
          "and return the parsed manifest.");

    m.def("report", &pipeline::render_report, py::arg("bundle_dir"),
          "Verify a bundle's checksums and render its report text.");

    m.def("verify_checksums", &pipeline::verify_checksums, py::arg("bundle_dir"),
          "Raise DynabeError if any bundle file was added, removed or modified.");

    m.def("online_update", &online_update_py, py::arg("classes"), py::arg("truth"),
          py::arg("f") = 5, py::arg("gamma") = 0.8, py::arg("lambda_") = 0.0,
          "Reweight agent class streams against the truth labels. Returns "
          "(predictions, per-epoch weight matrix with the initial uniform row first).");

    m.def("select_features", &select_features_py, py::arg("X"), py::arg("names"),
          py::arg("y"), py::arg("keep_fraction") = 0.2, py::arg("seed") = 0,
          py::arg("p_threshold") = 0.5, py::arg("k_neighbors") = 10,
          py::arg("n_trees") = 200,
          "Hybrid feature selection; returns the kept feature names, best first.");

    m.def("max_drawdown", &backtest::max_drawdown, py::arg("values"));
    m.def("annualized_return", &backtest::annualized_return, py::arg("values"),
          py::arg("trading_days_per_year") = 250.0);
    m.def("sharpe_ratio", &backtest::sharpe_ratio, py::arg("values"),
          py::arg("risk_free_annual"), py::arg("trading_days_per_year") = 250.0);
}
