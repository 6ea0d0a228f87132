#pragma once

#include "causalcast/backtest.hpp"
#include "causalcast/ingest.hpp"
#include "causalcast/panel.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace causalcast::evaluation {

struct DatedValues {
  std::vector<MonthStamp> dates;
  std::vector<double> values;
};

/// Trailing-window errors; the first value sits at the h-th record. Throws
/// WindowTooLong when h exceeds the ledger length.
DatedValues rolling_rmse(const backtest::BacktestLedger& ledger, int h);
DatedValues rolling_mae(const backtest::BacktestLedger& ledger, int h);

struct ErrorStats {
  std::size_t count = 0;
  double mae = 0.0;
  double rmse = 0.0;
};

struct MetricsReport {
  ErrorStats overall;
  std::optional<ErrorStats> normal;
  std::optional<ErrorStats> crisis;
  std::optional<double> mae_increase_pct;  // 100 * (crisis / normal - 1)
  std::vector<std::string> flags;
};

/// 100 * (crisis_mae / normal_mae - 1); nullopt when normal_mae is zero.
std::optional<double> mae_increase_pct(double normal_mae, double crisis_mae);

/// Reclassifies every record with `calendar`.
MetricsReport regime_metrics(const backtest::BacktestLedger& ledger, const ingest::RegimeCalendar& calendar);

struct StrategySeries {
  std::vector<MonthStamp> dates;
  std::vector<double> returns;
  std::vector<int> positions;  // -1, 0, +1
};

/// Sign rule: position = sgn(y_pred), zero forecast is flat; R = position * y_true.
StrategySeries strategy_returns(const backtest::BacktestLedger& ledger);
/// Always long.
StrategySeries buy_and_hold(const backtest::BacktestLedger& ledger);

/// Throws Misaligned unless both series share the same dates.
StrategySeries combine_portfolios(const StrategySeries& a, const StrategySeries& b, double weight_a = 0.5);

struct PortfolioStats {
  std::size_t count = 0;
  double expected_return = 0.0;  // 12 * mean monthly return
  std::optional<double> sharpe;   // mean / sample sd * sqrt(12)
  std::optional<double> sortino;  // mean / sqrt(mean(min(R, 0)^2)) * sqrt(12)
  std::vector<std::string> flags;
};

/// Throws Insufficient for fewer than two observations.
PortfolioStats portfolio_stats(const std::vector<double>& returns);

struct PortfolioReport {
  PortfolioStats overall;
  std::optional<PortfolioStats> normal;
  std::optional<PortfolioStats> crisis;
  std::vector<std::string> flags;
};

/// Regimes with fewer than two observations are reported absent and flagged.
PortfolioReport portfolio_metrics(const StrategySeries& series, const ingest::RegimeCalendar& calendar);

struct StabilityMatrix {
  std::vector<MonthStamp> dates;
  std::vector<std::string> features;  // ever selected, in order of first selection
  std::vector<std::vector<int>> cells;  // [month][feature] in {0, 1}
};

StabilityMatrix selection_stability(const backtest::BacktestLedger& ledger);

std::string stability_csv(const StabilityMatrix& matrix);
std::string dated_values_csv(const DatedValues& series);
std::string strategy_csv(const StrategySeries& series);

nlohmann::json to_json(const MetricsReport& report);
nlohmann::json to_json(const PortfolioReport& report);

/// One row per named report, columns laid out as normal/crisis MAE and RMSE plus the increase.
std::string error_table_csv(const std::vector<std::pair<std::string, MetricsReport>>& rows);
/// One row per named portfolio: E[R], Sharpe, Sortino for overall, normal and crisis.
std::string portfolio_table_csv(const std::vector<std::pair<std::string, PortfolioReport>>& rows);

}  // namespace causalcast::evaluation
