#include <doctest.h>

#include <Eigen/Dense>
#include <cstdio>
#include <string>
#include <vector>

#include "dynabe/baselines.hpp"
#include "dynabe/errors.hpp"
#include "dynabe/io.hpp"
#include "dynabe/rng.hpp"

using namespace dynabe;
using namespace dynabe::baselines;

namespace {

// Wide-margin task: label is the sign of feature 0, feature 1 is noise.
void margin_data(std::size_t n, std::uint64_t seed, Eigen::MatrixXd& X, Eigen::VectorXd& y,
                 std::vector<int>* labels = nullptr) {
    Rng rng(seed);
    X.resize(static_cast<Eigen::Index>(n), 2);
    y.resize(static_cast<Eigen::Index>(n));
    if (labels != nullptr) labels->resize(n);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const bool up = rng.uniform() < 0.5;
        X(i, 0) = (up ? 1.0 : -1.0) * rng.uniform(0.8, 2.0);
        X(i, 1) = rng.normal();
        y(i) = up ? 1.0 : 0.0;
        if (labels != nullptr) (*labels)[static_cast<std::size_t>(i)] = up ? 1 : 0;
    }
    y(0) = 1.0;
    X(0, 0) = 1.2;
    y(1) = 0.0;
    X(1, 0) = -1.2;
    if (labels != nullptr) {
        (*labels)[0] = 1;
        (*labels)[1] = 0;
    }
}

}  // namespace

TEST_CASE("baselines ace a separable task") {
    Eigen::MatrixXd X, Xv;
    Eigen::VectorXd y, yv;
    std::vector<int> truth;
    margin_data(60, 2205, X, y);
    margin_data(30, 2206, Xv, yv, &truth);

    std::vector<std::pair<std::string, learners::TuneResult>> log;
    auto report = run_baselines(X, y, Xv, truth, 5, 0.0, 42, &log);

    REQUIRE(report.rows.size() == 4);
    CHECK(report.rows[0].model == "svm_rbf");
    CHECK(report.rows[1].model == "mlp");
    CHECK(report.rows[2].model == "random_forest");
    CHECK(report.rows[3].model == "dynabe_online");
    for (const auto& row : report.rows) {
        CHECK(row.error >= 0.0);
        CHECK(row.error <= 0.12);
    }
    CHECK(log.size() == 3);
    CHECK_FALSE(report.note.empty());
}

TEST_CASE("baseline report is reproducible per seed") {
    Eigen::MatrixXd X, Xv;
    Eigen::VectorXd y, yv;
    std::vector<int> truth;
    margin_data(40, 31415, X, y);
    margin_data(20, 27182, Xv, yv, &truth);

    auto a = run_baselines(X, y, Xv, truth, 3, 0.25, 777);
    auto b = run_baselines(X, y, Xv, truth, 3, 0.25, 777);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].model == b.rows[i].model);
        CHECK(a.rows[i].error == b.rows[i].error);
    }
    CHECK(a.rows[3].error == 0.25);
}

TEST_CASE("baseline input validation") {
    Eigen::MatrixXd X, Xv;
    Eigen::VectorXd y, yv;
    std::vector<int> truth;
    margin_data(30, 111, X, y);
    margin_data(10, 112, Xv, yv, &truth);
    CHECK_THROWS_AS(run_baselines(X, y, Xv, {1, 0}, 0, 0.0, 1), SchemaError);
    CHECK_THROWS_AS(run_baselines(X, y, Xv, truth, 10, 0.0, 1), EvaluationError);
    CHECK_THROWS_AS(run_baselines(X, y, Xv, truth, 2, 1.5, 1), ParamError);
}

TEST_CASE("comparison csv lists one row per model") {
    ComparisonReport report;
    report.rows = {{"svm_rbf", 0.375}, {"mlp", 0.5}, {"random_forest", 0.25},
                   {"dynabe_online", 0.3112}};
    const std::string path = "/tmp/dynabe_test_compare.csv";
    write_comparison_csv(report, path);
    auto text = read_text_file(path);
    CHECK(text.rfind("model,misclassification\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);
    CHECK(text.find("dynabe_online,0.3112") != std::string::npos);
    std::remove(path.c_str());
}
