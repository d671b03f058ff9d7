#pragma once

#include "dynabe/date.hpp"

#include <string>
#include <vector>

namespace dynabe::backtest {

enum class Position { kCash, kLong };

std::string to_string(Position p);

/// Daily account state of the naive long/flat strategy. positions[t] is the
/// stance held over the close-to-close interval starting at dates[t]; the
/// final date carries kCash since no interval follows it.
struct AssetCurve {
    std::vector<Date> dates;
    std::vector<double> values;
    std::vector<Position> positions;
};

/// All-cash start at value 1.0. An up signal on day t rides the t -> t+1
/// close ratio, a down signal sits it out in cash. No costs, fractional
/// shares allowed. signals must cover every day but the last.
AssetCurve run_naive_strategy(const std::vector<Date>& dates,
                              const std::vector<double>& closes,
                              const std::vector<int>& signals);

/// Compound annualization: (V_end/V_start)^(days_per_year/intervals) - 1.
double annualized_return(const std::vector<double>& values,
                         double trading_days_per_year = 250.0);

/// Simple difference of two annualized fractions.
double excess_return(double strategy_annualized, double benchmark_annualized);

/// Daily excess returns against (1+rf)^(1/days) - 1, annualized by
/// sqrt(days); sample standard deviation. Throws EvaluationError when the
/// daily returns have zero variance.
double sharpe_ratio(const std::vector<double>& values, double risk_free_annual,
                    double trading_days_per_year = 250.0);

/// Largest peak-to-trough fractional loss, in [0, 1].
double max_drawdown(const std::vector<double>& values);

struct PerformanceReport {
    double annualized = 0.0;         // strategy annualized absolute return
    double stock_annualized = 0.0;   // buy-and-hold on the stock
    double index_annualized = 0.0;   // buy-and-hold on the benchmark index
    double excess_vs_stock = 0.0;    // annualized - stock_annualized
    double excess_vs_index = 0.0;    // annualized - index_annualized
    double sharpe = 0.0;
    double drawdown = 0.0;
};

/// Full metric suite for one strategy curve against the stock's own closes
/// and a benchmark index, all three date-aligned.
PerformanceReport evaluate_strategy(const AssetCurve& curve,
                                    const std::vector<double>& stock_closes,
                                    const std::vector<double>& index_closes,
                                    double risk_free_annual,
                                    double trading_days_per_year = 250.0);

/// Plot-ready table: date, strategy value, buy-and-hold stock value and
/// index value (both normalized to 1.0 at the start), position.
void write_curve_csv(const AssetCurve& curve, const std::vector<double>& stock_closes,
                     const std::vector<double>& index_closes, const std::string& path);

std::vector<std::string> report_csv_header();
std::vector<std::string> report_csv_row(const std::string& label,
                                        const PerformanceReport& report);

}  // namespace dynabe::backtest
