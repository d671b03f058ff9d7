#include "dynabe/backtest.hpp"

#include "dynabe/errors.hpp"
#include "dynabe/io.hpp"

#include <cmath>

namespace dynabe::backtest {

std::string to_string(Position p) {
    return p == Position::kLong ? "LONG" : "CASH";
}

AssetCurve run_naive_strategy(const std::vector<Date>& dates,
                              const std::vector<double>& closes,
                              const std::vector<int>& signals) {
    if (dates.size() != closes.size()) {
        throw SchemaError("dates and closes disagree in length");
    }
    if (closes.empty()) {
        throw InsufficientDataError("cannot trade an empty price series");
    }
    if (signals.size() != closes.size() - 1) {
        throw SchemaError("need exactly one signal per day except the last");
    }
    for (double c : closes) {
        if (!(c > 0.0)) {
            throw DataError("non-positive closing price");
        }
    }

    AssetCurve curve;
    curve.dates = dates;
    curve.values.resize(closes.size());
    curve.positions.resize(closes.size(), Position::kCash);
    curve.values[0] = 1.0;
    for (std::size_t t = 0; t + 1 < closes.size(); ++t) {
        const bool go_long = signals[t] == 1;
        curve.positions[t] = go_long ? Position::kLong : Position::kCash;
        curve.values[t + 1] =
            go_long ? curve.values[t] * (closes[t + 1] / closes[t]) : curve.values[t];
    }
    return curve;
}

double annualized_return(const std::vector<double>& values, double trading_days_per_year) {
    if (values.size() < 2) {
        throw InsufficientDataError("annualized return needs at least two points");
    }
    if (!(trading_days_per_year > 0.0)) {
        throw ParamError("trading days per year must be positive");
    }
    for (double v : values) {
        if (!(v > 0.0)) {
            throw DataError("asset values must be positive");
        }
    }
    const double intervals = static_cast<double>(values.size() - 1);
    return std::pow(values.back() / values.front(), trading_days_per_year / intervals) - 1.0;
}

double excess_return(double strategy_annualized, double benchmark_annualized) {
    return strategy_annualized - benchmark_annualized;
}

double sharpe_ratio(const std::vector<double>& values, double risk_free_annual,
                    double trading_days_per_year) {
    if (values.size() < 3) {
        throw InsufficientDataError("sharpe ratio needs at least three points");
    }
    if (!(trading_days_per_year > 0.0)) {
        throw ParamError("trading days per year must be positive");
    }
    for (double v : values) {
        if (!(v > 0.0)) {
            throw DataError("asset values must be positive");
        }
    }
    const double rf_daily =
        std::pow(1.0 + risk_free_annual, 1.0 / trading_days_per_year) - 1.0;
    const std::size_t n = values.size() - 1;
    std::vector<double> excess(n);
    double mean = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        excess[t] = (values[t + 1] / values[t] - 1.0) - rf_daily;
        mean += excess[t];
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double e : excess) {
        ss += (e - mean) * (e - mean);
    }
    const double var = ss / static_cast<double>(n - 1);
    if (var == 0.0) {
        throw EvaluationError("sharpe ratio undefined: zero return variance");
    }
    return mean / std::sqrt(var) * std::sqrt(trading_days_per_year);
}

double max_drawdown(const std::vector<double>& values) {
    if (values.empty()) {
        throw InsufficientDataError("drawdown of an empty curve");
    }
    double peak = 0.0;
    double worst = 0.0;
    for (double v : values) {
        if (!(v > 0.0)) {
            throw DataError("asset values must be positive");
        }
        peak = std::max(peak, v);
        worst = std::max(worst, (peak - v) / peak);
    }
    return worst;
}

PerformanceReport evaluate_strategy(const AssetCurve& curve,
                                    const std::vector<double>& stock_closes,
                                    const std::vector<double>& index_closes,
                                    double risk_free_annual, double trading_days_per_year) {
    if (stock_closes.size() != curve.values.size() ||
        index_closes.size() != curve.values.size()) {
        throw SchemaError("strategy, stock and index series must cover the same dates");
    }
    PerformanceReport report;
    report.annualized = annualized_return(curve.values, trading_days_per_year);
    report.stock_annualized = annualized_return(stock_closes, trading_days_per_year);
    report.index_annualized = annualized_return(index_closes, trading_days_per_year);
    report.excess_vs_stock = excess_return(report.annualized, report.stock_annualized);
    report.excess_vs_index = excess_return(report.annualized, report.index_annualized);
    report.sharpe = sharpe_ratio(curve.values, risk_free_annual, trading_days_per_year);
    report.drawdown = max_drawdown(curve.values);
    return report;
}

void write_curve_csv(const AssetCurve& curve, const std::vector<double>& stock_closes,
                     const std::vector<double>& index_closes, const std::string& path) {
    if (stock_closes.size() != curve.values.size() ||
        index_closes.size() != curve.values.size()) {
        throw SchemaError("curve and benchmark series must cover the same dates");
    }
    std::vector<std::vector<std::string>> rows;
    rows.reserve(curve.values.size());
    for (std::size_t t = 0; t < curve.values.size(); ++t) {
        rows.push_back({curve.dates[t].to_string(), format_double(curve.values[t]),
                        format_double(stock_closes[t] / stock_closes[0]),
                        format_double(index_closes[t] / index_closes[0]),
                        to_string(curve.positions[t])});
    }
    write_csv(path, {"date", "strategy", "stock", "index", "position"}, rows);
}

std::vector<std::string> report_csv_header() {
    return {"strategy",       "annualized_return", "stock_return",    "index_return",
            "excess_vs_stock", "excess_vs_index",  "sharpe",          "max_drawdown"};
}

std::vector<std::string> report_csv_row(const std::string& label,
                                        const PerformanceReport& report) {
    return {label,
            format_double(report.annualized),
            format_double(report.stock_annualized),
            format_double(report.index_annualized),
            format_double(report.excess_vs_stock),
            format_double(report.excess_vs_index),
            format_double(report.sharpe),
            format_double(report.drawdown)};
}

}  // namespace dynabe::backtest
