#include "causalcast/evaluation.hpp"

#include "../support/oracles.hpp"
#include "helpers.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <random>
#include <sstream>

using namespace causalcast;
using namespace causalcast::evaluation;
using backtest::BacktestLedger;

namespace {

BacktestLedger make_ledger(const std::vector<double>& y_true, const std::vector<double>& y_pred,
                           MonthStamp start = {2005, 1}) {
  BacktestLedger l;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    backtest::LedgerRecord r;
    r.date = start.plus(static_cast<int>(i));
    r.y_true = y_true[i];
    r.y_pred = y_pred[i];
    l.records.push_back(r);
  }
  return l;
}

BacktestLedger random_ledger(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  std::vector<double> a, b;
  for (int i = 0; i < n; ++i) a.push_back(4.0 * n01(rng)), b.push_back(n01(rng));
  return make_ledger(a, b);
}

StrategySeries series_of(const std::vector<double>& r) {
  StrategySeries s;
  for (std::size_t i = 0; i < r.size(); ++i) {
    s.dates.push_back(MonthStamp(2010, 1).plus(static_cast<int>(i)));
    s.returns.push_back(r[i]);
    s.positions.push_back(1);
  }
  return s;
}

}  // namespace

TEST_CASE("rolling errors") {
  const auto c = make_ledger({1, 2, 3, 4, 5}, {1.5, 2.5, 3.5, 4.5, 5.5});
  for (double v : rolling_rmse(c, 3).values) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
  for (double v : rolling_mae(c, 2).values) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));

  const auto l = random_ledger(40, 1);
  const DatedValues one = rolling_mae(l, 1);
  REQUIRE(one.values.size() == 40);
  for (std::size_t i = 0; i < 40; ++i) CHECK(one.values[i] == std::abs(l.records[i].y_true - l.records[i].y_pred));
  CHECK(rolling_rmse(l, 1).values == one.values);

  const DatedValues r12 = rolling_rmse(l, 12);
  REQUIRE(r12.values.size() == 29);
  CHECK(r12.dates.front() == l.records[11].date);
  for (std::size_t k = 0; k < r12.values.size(); ++k) {
    double s = 0.0;
    for (std::size_t j = k; j < k + 12; ++j) s += std::pow(l.records[j].y_true - l.records[j].y_pred, 2);
    CHECK(std::abs(r12.values[k] - std::sqrt(s / 12.0)) <= 1e-12);
  }
  const MetricsReport whole = regime_metrics(l, {});
  CHECK(rolling_rmse(l, 40).values.front() == doctest::Approx(whole.overall.rmse).epsilon(1e-14));
  CHECK_KIND(rolling_rmse(l, 41), ErrorKind::WindowTooLong);
  CHECK_KIND(rolling_mae(l, 0), ErrorKind::PreconditionViolated);
}

TEST_CASE("relative MAE increase reproduces the published table") {
  CHECK(std::abs(*mae_increase_pct(3.39, 4.80) - 41.59) <= 0.05);
  CHECK(std::abs(*mae_increase_pct(3.52, 4.98) - 41.48) <= 0.05);
  CHECK(std::abs(*mae_increase_pct(3.19, 4.52) - 41.69) <= 0.05);
  CHECK(!mae_increase_pct(0.0, 1.0).has_value());
}

TEST_CASE("regime metrics split, flag and pool consistently") {
  const auto cal = ingest::load_calendar("2005-04..2005-09\n");
  const auto l = random_ledger(24, 2);
  const MetricsReport m = regime_metrics(l, cal);
  REQUIRE(m.normal);
  REQUIRE(m.crisis);
  CHECK(m.crisis->count == 6);
  CHECK(m.normal->count == 18);
  const double pooled = (m.normal->mae * 18 + m.crisis->mae * 6) / 24;
  CHECK(std::abs(pooled - m.overall.mae) <= 1e-10);
  CHECK(*m.mae_increase_pct == doctest::Approx(100.0 * (m.crisis->mae / m.normal->mae - 1.0)));

  const MetricsReport calm = regime_metrics(l, {});
  CHECK(calm.normal.has_value());
  CHECK(!calm.crisis.has_value());
  CHECK(!calm.mae_increase_pct.has_value());
  CHECK(!calm.flags.empty());
  CHECK_KIND(regime_metrics(BacktestLedger{}, cal), ErrorKind::Insufficient);

  const auto j = to_json(calm);
  CHECK(j.contains("flags"));
  std::ostringstream os;
  os << j;
  CHECK(nlohmann::json::parse(os.str()) == j);
}

TEST_CASE("sign rule") {
  const StrategySeries s = strategy_returns(make_ledger({-1, -1, 3, 2}, {2, -2, 0, 1}));
  CHECK(s.returns == std::vector<double>{-1, 1, 0, 2});
  CHECK(s.positions == std::vector<int>{1, -1, 0, 1});
  for (std::size_t i = 0; i < s.returns.size(); ++i)
    if (s.positions[i] != 0) CHECK(std::abs(s.returns[i]) == std::abs(std::vector<double>{-1, -1, 3, 2}[i]));

  const auto l = random_ledger(50, 3);
  std::vector<double> y, yhat;
  double abs_sum = 0.0;
  for (const auto& r : l.records) {
    y.push_back(r.y_true);
    yhat.push_back(r.y_true * 0.3);
    abs_sum += std::abs(r.y_true);
  }
  const StrategySeries right = strategy_returns(make_ledger(y, yhat));
  double cum = 0.0;
  for (double r : right.returns) cum += r;
  CHECK(cum == doctest::Approx(abs_sum).epsilon(1e-14));
  const StrategySeries bh = buy_and_hold(l);
  for (std::size_t i = 0; i < bh.returns.size(); ++i) CHECK(bh.returns[i] == l.records[i].y_true);
}

TEST_CASE("portfolio statistics") {
  const PortfolioStats alt = portfolio_stats({1, -1, 1, -1, 1, -1});
  CHECK(alt.expected_return == 0.0);
  REQUIRE(alt.sharpe);
  CHECK(*alt.sharpe == 0.0);

  const PortfolioStats up = portfolio_stats({1, 2, 0.5, 3});
  CHECK(!up.sortino.has_value());
  CHECK(!up.flags.empty());

  std::mt19937_64 rng(4);
  std::normal_distribution<double> n01;
  std::vector<double> r;
  for (int i = 0; i < 120; ++i) r.push_back(0.5 + 4.0 * n01(rng));
  const PortfolioStats s = portfolio_stats(r);
  CHECK(std::abs(s.expected_return - 12.0 * oracle::mean(r)) <= 1e-10);
  CHECK(std::abs(*s.sharpe - oracle::sharpe(r)) <= 1e-10);
  CHECK(std::abs(*s.sortino - oracle::sortino(r)) <= 1e-10);
  CHECK_KIND(portfolio_stats({1.0}), ErrorKind::Insufficient);
}

TEST_CASE("portfolio metrics per regime") {
  const auto cal = ingest::load_calendar("2010-03..2010-03\n");
  const PortfolioReport p = portfolio_metrics(series_of({1, 2, -1, 3, -2, 0.5}), cal);
  CHECK(p.overall.count == 6);
  REQUIRE(p.normal);
  CHECK(p.normal->count == 5);
  CHECK(!p.crisis.has_value());  // a single crisis month
  CHECK(!p.flags.empty());
}

TEST_CASE("combined portfolios") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  std::vector<double> a, b;
  for (int i = 0; i < 30; ++i) a.push_back(n01(rng)), b.push_back(n01(rng));
  const StrategySeries A = series_of(a), B = series_of(b);
  CHECK(combine_portfolios(A, A, 0.5).returns == A.returns);
  CHECK(combine_portfolios(A, B, 1.0).returns == A.returns);
  const StrategySeries half = combine_portfolios(A, B);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(half.returns[i] == doctest::Approx((a[i] + b[i]) / 2).epsilon(1e-15));
  const double lin = 0.3 * portfolio_stats(a).expected_return + 0.7 * portfolio_stats(b).expected_return;
  CHECK(portfolio_stats(combine_portfolios(A, B, 0.3).returns).expected_return == doctest::Approx(lin).epsilon(1e-12));
  StrategySeries shifted = B;
  shifted.dates.front() = MonthStamp(1999, 1);
  CHECK_KIND(combine_portfolios(A, shifted), ErrorKind::Misaligned);
}

TEST_CASE("selection stability matrix") {
  auto l = random_ledger(6, 6);
  for (auto& r : l.records) r.selected.selected = {"a", "c"};
  const StabilityMatrix same = selection_stability(l);
  CHECK(same.features == std::vector<std::string>{"a", "c"});
  for (const auto& row : same.cells) CHECK(row == std::vector<int>{1, 1});

  std::mt19937_64 rng(7);
  std::bernoulli_distribution coin(0.4);
  const std::vector<std::string> pool = {"u", "v", "w", "never"};
  for (auto& r : l.records) {
    r.selected.selected.clear();
    for (std::size_t k = 0; k < 3; ++k)
      if (coin(rng)) r.selected.selected.push_back(pool[k]);
  }
  const StabilityMatrix m = selection_stability(l);
  CHECK(std::find(m.features.begin(), m.features.end(), "never") == m.features.end());
  for (std::size_t i = 0; i < l.size(); ++i)
    for (std::size_t f = 0; f < m.features.size(); ++f)
      CHECK(m.cells[i][f] == static_cast<int>(l.records[i].selected.contains(m.features[f])));
  CHECK(stability_csv(m).rfind("date", 0) == 0);
}

TEST_CASE("table writers") {
  const auto l = random_ledger(24, 8);
  const auto cal = ingest::load_calendar("2005-04..2005-09\n");
  const std::string t1 = error_table_csv({{"granger", regime_metrics(l, cal)}});
  CHECK(t1.rfind("model,normal_mae,crisis_mae,mae_increase_pct", 0) == 0);
  const std::string t2 = portfolio_table_csv({{"granger", portfolio_metrics(strategy_returns(l), cal)}});
  CHECK(t2.rfind("portfolio,", 0) == 0);
  CHECK(dated_values_csv(rolling_mae(l, 3)).rfind("date,value\n", 0) == 0);
  CHECK(strategy_csv(strategy_returns(l)).rfind("date,position,return\n", 0) == 0);
}
