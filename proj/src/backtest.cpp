#include "causalcast/backtest.hpp"

#include "causalcast/error.hpp"
#include "causalcast/registry.hpp"

#include <cstdio>
#include <optional>
#include <sstream>

namespace causalcast::backtest {

void BacktestConfig::validate() const {
  if (p < 1) throw Error(ErrorKind::PreconditionViolated, "backtest: p must be >= 1");
  if (window <= p + 2) throw Error(ErrorKind::PreconditionViolated, "backtest: window must exceed p + 2");
  if (reselect_every < 1) throw Error(ErrorKind::PreconditionViolated, "backtest: reselect_every must be >= 1");
  if (timeout_seconds < 0.0) throw Error(ErrorKind::PreconditionViolated, "backtest: timeout must be >= 0");
}

nlohmann::json BacktestConfig::to_json() const {
  return {{"window", window},         {"p", p},       {"selector", selector_id},
          {"params", params},         {"seed", seed}, {"reselect_every", reselect_every},
          {"timeout_seconds", timeout_seconds}};
}

double forecast_next(const numerics::OlsFit& fit, const Vector& regressors) {
  const Eigen::Index offset = fit.has_intercept ? 1 : 0;
  if (regressors.size() != fit.beta.size() - offset)
    throw Error(ErrorKind::ShapeError, "forecast_next: expected " + std::to_string(fit.beta.size() - offset) +
                                           " regressors, got " + std::to_string(regressors.size()));
  const double intercept = fit.has_intercept ? fit.beta[0] : 0.0;
  return intercept + fit.beta.tail(regressors.size()).dot(regressors);
}

numerics::OlsFit fit_forecaster(const AlignedPanel& train, int p, const std::vector<Eigen::Index>& features) {
  const auto design = build_design(train, p);
  return numerics::ols_fit(design.gather(features, true), design.y, true);
}

std::uint64_t step_seed(std::uint64_t seed, MonthStamp date) noexcept {
  // splitmix64 finalizer over the combined key
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(date.index()) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

selectors::FeatureSet empty_selection(const AlignedPanel& panel, const std::string& id) {
  selectors::FeatureSet fs;
  fs.selector_id = id;
  fs.candidates = panel.feature_names();
  for (const auto& name : fs.candidates) fs.diagnostics.push_back({name, selectors::kNaN, selectors::kNaN, selectors::kNaN});
  return fs;
}

}  // namespace

BacktestLedger run_backtest(const AlignedPanel& panel, const ingest::RegimeCalendar& calendar,
                            const BacktestConfig& config, const RecordCallback& on_record) {
  config.validate();
  if (panel.rows() <= config.window + 1)
    throw Error(ErrorKind::InsufficientHistory, "backtest: panel has " + std::to_string(panel.rows()) +
                                                    " rows, need more than window + 1 = " +
                                                    std::to_string(config.window + 1));
  const auto selector = selectors::make_selector(config.selector_id, config.params, config.p);

  BacktestLedger ledger;
  ledger.config = config;
  ledger.target_name = panel.target_name();
  std::optional<selectors::FeatureSet> previous;

  for (Eigen::Index o = config.window; o < panel.rows(); ++o) {
    LedgerRecord rec;
    rec.date = panel.dates()[static_cast<std::size_t>(o)];
    rec.y_true = panel.target()[o];
    rec.regime = calendar.classify(rec.date);
    const AlignedPanel train = panel.head(o);

    const bool on_cadence = (o - config.window) % config.reselect_every == 0;
    selectors::FeatureSet current;
    if (on_cadence || !previous) {
      try {
        selectors::SelectorContext ctx;
        ctx.seed = step_seed(config.seed, rec.date);
        ctx.deadline = selectors::Deadline::after(config.timeout_seconds);
        ctx.calendar = &calendar;
        current = selector->select(train, build_design(train, config.p), ctx);
      } catch (const Error& e) {
        rec.warnings.push_back(std::string("selector failed: ") + e.what() +
                               (previous ? "; reusing previous selection" : "; using target lag only"));
        current = previous ? *previous : empty_selection(panel, config.selector_id);
        rec.reused = previous.has_value();
      }
    } else {
      current = *previous;
      rec.reused = true;
    }

    auto features = current.indices_in(panel.feature_names());
    numerics::OlsFit fit;
    try {
      fit = fit_forecaster(train, config.p, features);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Underdetermined) throw;
      rec.warnings.push_back("forecaster underdetermined with " + std::to_string(features.size()) +
                             " features; using target lag only");
      current = empty_selection(panel, config.selector_id);
      features.clear();
      fit = fit_forecaster(train, config.p, features);
    }
    rec.y_pred = forecast_next(fit, design_row(train, train.rows(), config.p, features, true));
    rec.selected = current;
    previous = std::move(current);
    if (on_record) on_record(rec);
    ledger.records.push_back(std::move(rec));
  }
  return ledger;
}

std::string ledger_csv(const std::vector<LedgerRecord>& records) {
  std::string out = "date,y_true,y_pred,regime,selected\n";
  for (const auto& r : records) {
    out += r.date.str() + ',' + ingest::format_double(r.y_true) + ',' + ingest::format_double(r.y_pred) + ',' +
           std::string(ingest::to_string(r.regime)) + ',';
    for (std::size_t i = 0; i < r.selected.selected.size(); ++i) {
      if (i) out += ';';
      out += r.selected.selected[i];
    }
    out += '\n';
  }
  return out;
}

std::string ledger_csv(const BacktestLedger& ledger) { return ledger_csv(ledger.records); }

BacktestLedger read_ledger_csv(std::string_view text) {
  const auto lines = ingest::split_lines(text);
  if (lines.empty() || ingest::split_csv_line(lines[0]) !=
                           std::vector<std::string>{"date", "y_true", "y_pred", "regime", "selected"})
    throw Error(ErrorKind::MalformedCsv, "ledger: expected header date,y_true,y_pred,regime,selected");
  BacktestLedger ledger;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto cells = ingest::split_csv_line(lines[i]);
    if (cells.size() == 4) cells.emplace_back();
    if (cells.size() != 5) throw Error(ErrorKind::MalformedCsv, "ledger line " + std::to_string(i + 1) + ": expected 5 cells");
    LedgerRecord rec;
    rec.date = MonthStamp::parse(cells[0]);
    rec.y_true = ingest::parse_cell(cells[1], i + 1);
    rec.y_pred = ingest::parse_cell(cells[2], i + 1);
    if (cells[3] == "crisis")
      rec.regime = ingest::Regime::Crisis;
    else if (cells[3] == "normal")
      rec.regime = ingest::Regime::Normal;
    else
      throw Error(ErrorKind::MalformedCsv, "ledger line " + std::to_string(i + 1) + ": bad regime '" + cells[3] + "'");
    std::stringstream names(cells[4]);
    for (std::string name; std::getline(names, name, ';');)
      if (!name.empty()) rec.selected.selected.push_back(name);
    if (!ledger.records.empty() && !(ledger.records.back().date < rec.date))
      throw Error(ErrorKind::MalformedCsv, "ledger dates must be strictly increasing");
    ledger.records.push_back(std::move(rec));
  }
  return ledger;
}

std::string config_hash(const BacktestConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.to_json().dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json manifest(const BacktestLedger& ledger) {
  nlohmann::json warnings = nlohmann::json::array();
  for (const auto& r : ledger.records) {
    for (const auto& w : r.warnings) warnings.push_back({{"date", r.date.str()}, {"message", w}});
    for (const auto& w : r.selected.warnings) warnings.push_back({{"date", r.date.str()}, {"message", w}});
  }
  nlohmann::json m = {{"config", ledger.config.to_json()},
                      {"config_hash", config_hash(ledger.config)},
                      {"seed", ledger.config.seed},
                      {"target", ledger.target_name},
                      {"records", ledger.records.size()},
                      {"warnings", warnings}};
  if (!ledger.records.empty()) {
    m["first_date"] = ledger.records.front().date.str();
    m["last_date"] = ledger.records.back().date.str();
  }
  return m;
}

}  // namespace causalcast::backtest
