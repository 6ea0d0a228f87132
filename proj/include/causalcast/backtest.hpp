#pragma once

#include "causalcast/ingest.hpp"
#include "causalcast/numerics.hpp"
#include "causalcast/panel.hpp"
#include "causalcast/selectors.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace causalcast::backtest {

struct BacktestConfig {
  Eigen::Index window = 60;  // initial training months
  int p = 1;
  std::string selector_id = "granger";
  nlohmann::json params = nlohmann::json::object();
  int reselect_every = 1;
  std::uint64_t seed = 0;
  double timeout_seconds = 0.0;  // per selector call; 0 = unlimited

  /// Throws PreconditionViolated unless window > p + 2 and reselect_every >= 1.
  void validate() const;
  nlohmann::json to_json() const;
};

struct LedgerRecord {
  MonthStamp date;
  double y_true = 0.0;
  double y_pred = 0.0;
  selectors::FeatureSet selected;
  ingest::Regime regime = ingest::Regime::Normal;
  bool reused = false;  // selection carried over from an earlier step
  std::vector<std::string> warnings;
};

struct BacktestLedger {
  std::vector<LedgerRecord> records;
  BacktestConfig config;
  std::string target_name;

  std::size_t size() const noexcept { return records.size(); }
};

/// Intercept plus dot product. Throws ShapeError on a length mismatch.
double forecast_next(const numerics::OlsFit& fit, const Vector& regressors);

/// OLS of y_t on [1, y_{t-1}, lags 1..p of `features`] over every row of `train`.
numerics::OlsFit fit_forecaster(const AlignedPanel& train, int p, const std::vector<Eigen::Index>& features);

/// Deterministic per-step seed.
std::uint64_t step_seed(std::uint64_t seed, MonthStamp date) noexcept;

using RecordCallback = std::function<void(const LedgerRecord&)>;

/// Fixed-start expanding window: for each row o = w..T-1, select on rows < o,
/// fit, and predict row o. Selector errors fall back to the previous selection
/// (or none) with a warning.
BacktestLedger run_backtest(const AlignedPanel& panel, const ingest::RegimeCalendar& calendar,
                            const BacktestConfig& config, const RecordCallback& on_record = {});

/// `date,y_true,y_pred,regime,selected` with `;`-joined names.
std::string ledger_csv(const BacktestLedger& ledger);
std::string ledger_csv(const std::vector<LedgerRecord>& records);
/// Restores dates, values, regimes and selected names (candidates and diagnostics are not stored).
BacktestLedger read_ledger_csv(std::string_view text);

/// FNV-1a over the canonical JSON dump of the config.
std::string config_hash(const BacktestConfig& config);
nlohmann::json manifest(const BacktestLedger& ledger);

}  // namespace causalcast::backtest
