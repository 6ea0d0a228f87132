#include "causalcast/evaluation.hpp"

#include "causalcast/error.hpp"

#include <algorithm>
#include <cmath>

namespace causalcast::evaluation {

namespace {

using backtest::BacktestLedger;

DatedValues rolling(const BacktestLedger& ledger, int h, bool squared) {
  if (h < 1) throw Error(ErrorKind::PreconditionViolated, "rolling window must be >= 1");
  const auto n = ledger.records.size();
  if (static_cast<std::size_t>(h) > n)
    throw Error(ErrorKind::WindowTooLong, "window " + std::to_string(h) + " exceeds ledger length " + std::to_string(n));
  DatedValues out;
  for (std::size_t i = static_cast<std::size_t>(h) - 1; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = i + 1 - static_cast<std::size_t>(h); j <= i; ++j) {
      const double e = ledger.records[j].y_true - ledger.records[j].y_pred;
      acc += squared ? e * e : std::fabs(e);
    }
    acc /= h;
    out.dates.push_back(ledger.records[i].date);
    out.values.push_back(squared ? std::sqrt(acc) : acc);
  }
  return out;
}

ErrorStats error_stats(const std::vector<double>& errors) {
  ErrorStats s;
  s.count = errors.size();
  double abs_sum = 0.0, sq_sum = 0.0;
  for (double e : errors) {
    abs_sum += std::fabs(e);
    sq_sum += e * e;
  }
  s.mae = abs_sum / static_cast<double>(s.count);
  s.rmse = std::sqrt(sq_sum / static_cast<double>(s.count));
  return s;
}

std::string cell(const std::optional<double>& v) { return v ? ingest::format_double(*v) : std::string(); }

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

nlohmann::json stats_json(const ErrorStats& s) { return {{"count", s.count}, {"mae", s.mae}, {"rmse", s.rmse}}; }

nlohmann::json stats_json(const PortfolioStats& s) {
  return {{"count", s.count},
          {"expected_return_annualized", s.expected_return},
          {"sharpe", opt_json(s.sharpe)},
          {"sortino", opt_json(s.sortino)},
          {"flags", s.flags}};
}

}  // namespace

DatedValues rolling_rmse(const BacktestLedger& ledger, int h) { return rolling(ledger, h, true); }
DatedValues rolling_mae(const BacktestLedger& ledger, int h) { return rolling(ledger, h, false); }

std::optional<double> mae_increase_pct(double normal_mae, double crisis_mae) {
  if (!(normal_mae > 0.0)) return std::nullopt;
  return 100.0 * (crisis_mae / normal_mae - 1.0);
}

MetricsReport regime_metrics(const BacktestLedger& ledger, const ingest::RegimeCalendar& calendar) {
  if (ledger.records.empty()) throw Error(ErrorKind::Insufficient, "regime_metrics: empty ledger");
  std::vector<double> all, normal, crisis;
  for (const auto& r : ledger.records) {
    const double e = r.y_true - r.y_pred;
    all.push_back(e);
    (calendar.classify(r.date) == ingest::Regime::Crisis ? crisis : normal).push_back(e);
  }
  MetricsReport out;
  out.overall = error_stats(all);
  if (!normal.empty()) out.normal = error_stats(normal);
  else out.flags.push_back("normal regime has no records");
  if (!crisis.empty()) out.crisis = error_stats(crisis);
  else out.flags.push_back("crisis regime has no records");
  if (out.normal && out.crisis) out.mae_increase_pct = mae_increase_pct(out.normal->mae, out.crisis->mae);
  if (!out.mae_increase_pct) out.flags.push_back("mae increase undefined");
  return out;
}

StrategySeries strategy_returns(const BacktestLedger& ledger) {
  if (ledger.records.empty()) throw Error(ErrorKind::Insufficient, "strategy_returns: empty ledger");
  StrategySeries out;
  for (const auto& r : ledger.records) {
    const int position = r.y_pred > 0.0 ? 1 : (r.y_pred < 0.0 ? -1 : 0);
    out.dates.push_back(r.date);
    out.positions.push_back(position);
    out.returns.push_back(position == 0 ? 0.0 : position * r.y_true);
  }
  return out;
}

StrategySeries buy_and_hold(const BacktestLedger& ledger) {
  StrategySeries out;
  for (const auto& r : ledger.records) {
    out.dates.push_back(r.date);
    out.positions.push_back(1);
    out.returns.push_back(r.y_true);
  }
  return out;
}

StrategySeries combine_portfolios(const StrategySeries& a, const StrategySeries& b, double weight_a) {
  if (a.dates != b.dates) throw Error(ErrorKind::Misaligned, "combine_portfolios: date ranges differ");
  StrategySeries out;
  out.dates = a.dates;
  for (std::size_t i = 0; i < a.returns.size(); ++i) {
    out.returns.push_back(weight_a * a.returns[i] + (1.0 - weight_a) * b.returns[i]);
    const double pos = weight_a * a.positions[i] + (1.0 - weight_a) * b.positions[i];
    out.positions.push_back(pos > 0.0 ? 1 : (pos < 0.0 ? -1 : 0));
  }
  return out;
}

PortfolioStats portfolio_stats(const std::vector<double>& returns) {
  const auto n = returns.size();
  if (n < 2) throw Error(ErrorKind::Insufficient, "portfolio metrics need at least 2 observations");
  PortfolioStats s;
  s.count = n;
  double sum = 0.0;
  for (double r : returns) sum += r;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0, down = 0.0;
  for (double r : returns) {
    ss += (r - mean) * (r - mean);
    const double neg = std::min(r, 0.0);
    down += neg * neg;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const double downside = std::sqrt(down / static_cast<double>(n));
  s.expected_return = 12.0 * mean;
  if (sd > 0.0) s.sharpe = mean / sd * std::sqrt(12.0);
  else s.flags.push_back("sharpe undefined: zero standard deviation");
  if (downside > 0.0) s.sortino = mean / downside * std::sqrt(12.0);
  else s.flags.push_back("sortino undefined: zero downside deviation");
  return s;
}

PortfolioReport portfolio_metrics(const StrategySeries& series, const ingest::RegimeCalendar& calendar) {
  PortfolioReport out;
  out.overall = portfolio_stats(series.returns);
  std::vector<double> normal, crisis;
  for (std::size_t i = 0; i < series.returns.size(); ++i)
    (calendar.classify(series.dates[i]) == ingest::Regime::Crisis ? crisis : normal).push_back(series.returns[i]);
  if (normal.size() >= 2) out.normal = portfolio_stats(normal);
  else out.flags.push_back("normal regime has fewer than 2 observations");
  if (crisis.size() >= 2) out.crisis = portfolio_stats(crisis);
  else out.flags.push_back("crisis regime has fewer than 2 observations");
  return out;
}

StabilityMatrix selection_stability(const BacktestLedger& ledger) {
  StabilityMatrix m;
  for (const auto& r : ledger.records)
    for (const auto& name : r.selected.selected)
      if (std::find(m.features.begin(), m.features.end(), name) == m.features.end()) m.features.push_back(name);
  for (const auto& r : ledger.records) {
    m.dates.push_back(r.date);
    std::vector<int> row(m.features.size(), 0);
    for (std::size_t j = 0; j < m.features.size(); ++j) row[j] = r.selected.contains(m.features[j]) ? 1 : 0;
    m.cells.push_back(std::move(row));
  }
  return m;
}

std::string stability_csv(const StabilityMatrix& matrix) {
  std::string out = "date";
  for (const auto& f : matrix.features) out += ',' + f;
  out += '\n';
  for (std::size_t i = 0; i < matrix.dates.size(); ++i) {
    out += matrix.dates[i].str();
    for (int v : matrix.cells[i]) out += v ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

std::string dated_values_csv(const DatedValues& series) {
  std::string out = "date,value\n";
  for (std::size_t i = 0; i < series.dates.size(); ++i)
    out += series.dates[i].str() + ',' + ingest::format_double(series.values[i]) + '\n';
  return out;
}

std::string strategy_csv(const StrategySeries& series) {
  std::string out = "date,position,return\n";
  for (std::size_t i = 0; i < series.dates.size(); ++i)
    out += series.dates[i].str() + ',' + std::to_string(series.positions[i]) + ',' +
           ingest::format_double(series.returns[i]) + '\n';
  return out;
}

nlohmann::json to_json(const MetricsReport& report) {
  return {{"overall", stats_json(report.overall)},
          {"normal", report.normal ? stats_json(*report.normal) : nlohmann::json(nullptr)},
          {"crisis", report.crisis ? stats_json(*report.crisis) : nlohmann::json(nullptr)},
          {"mae_increase_pct", opt_json(report.mae_increase_pct)},
          {"flags", report.flags}};
}

nlohmann::json to_json(const PortfolioReport& report) {
  return {{"overall", stats_json(report.overall)},
          {"normal", report.normal ? stats_json(*report.normal) : nlohmann::json(nullptr)},
          {"crisis", report.crisis ? stats_json(*report.crisis) : nlohmann::json(nullptr)},
          {"flags", report.flags}};
}

std::string error_table_csv(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  std::string out =
      "model,normal_mae,crisis_mae,mae_increase_pct,normal_rmse,crisis_rmse,overall_mae,overall_rmse,normal_count,"
      "crisis_count\n";
  for (const auto& [name, r] : rows) {
    auto mae = [](const std::optional<ErrorStats>& s) { return s ? std::optional<double>(s->mae) : std::nullopt; };
    auto rmse = [](const std::optional<ErrorStats>& s) { return s ? std::optional<double>(s->rmse) : std::nullopt; };
    out += name + ',' + cell(mae(r.normal)) + ',' + cell(mae(r.crisis)) + ',' + cell(r.mae_increase_pct) + ',' +
           cell(rmse(r.normal)) + ',' + cell(rmse(r.crisis)) + ',' + ingest::format_double(r.overall.mae) + ',' +
           ingest::format_double(r.overall.rmse) + ',' + std::to_string(r.normal ? r.normal->count : 0) + ',' +
           std::to_string(r.crisis ? r.crisis->count : 0) + '\n';
  }
  return out;
}

std::string portfolio_table_csv(const std::vector<std::pair<std::string, PortfolioReport>>& rows) {
  std::string out = "portfolio";
  for (const char* regime : {"overall", "normal", "crisis"})
    for (const char* metric : {"expected_return", "sharpe", "sortino"}) out += std::string(",") + regime + '_' + metric;
  out += '\n';
  for (const auto& [name, r] : rows) {
    out += name;
    for (const auto* s : {&r.overall, r.normal ? &*r.normal : nullptr, r.crisis ? &*r.crisis : nullptr}) {
      if (!s) {
        out += ",,,";
        continue;
      }
      out += ',' + ingest::format_double(s->expected_return) + ',' + cell(s->sharpe) + ',' + cell(s->sortino);
    }
    out += '\n';
  }
  return out;
}

}  // namespace causalcast::evaluation
