#include "causalcast/backtest.hpp"
#include "causalcast/cli.hpp"
#include "causalcast/error.hpp"
#include "causalcast/evaluation.hpp"
#include "causalcast/registry.hpp"
#include "causalcast/synthlab.hpp"

#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

namespace causalcast::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Writes through a temporary so readers never see a half-written file.
void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::ConfigError, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorKind::ConfigError, "write failed for " + path.string());
  }
  fs::rename(tmp, path);
}

int input_error(std::ostream& err, const std::exception& e) {
  err << "error: " << e.what() << '\n';
  return kInputError;
}

fs::path ledger_path(const RunConfig& c, const std::string& name) { return c.output_dir / "ledgers" / (name + ".csv"); }

}  // namespace

AlignedPanel build_panel(const RunConfig& config, json* log) {
  std::map<std::string, int> groups;
  if (!config.groups_csv.empty()) groups = ingest::parse_groups(read_text(config.groups_csv));
  const auto fred = ingest::parse_fredmd(read_text(config.fredmd_csv), groups);
  const auto transformed = ingest::transform_panel(fred);
  const auto returns = ingest::prices_to_returns(ingest::parse_prices(read_text(config.prices_csv)));
  AlignedPanel panel = align_and_shift(returns, transformed, config.shift_months, config.target_name);
  if (log) {
    std::set<int> feature_months;
    for (const auto& d : transformed.dates) feature_months.insert(d.index() + config.shift_months);
    std::size_t overlap = 0;
    for (const auto& d : returns.dates) overlap += feature_months.count(d.index());
    *log = {{"fredmd_rows", fred.raw.dates.size()},
            {"fredmd_series", fred.raw.names.size()},
            {"excluded_series", fred.excluded},
            {"transformed_rows", transformed.dates.size()},
            {"return_rows", returns.dates.size()},
            {"overlapping_months", overlap},
            {"rows_dropped", overlap - static_cast<std::size_t>(panel.rows())},
            {"panel_rows", panel.rows()},
            {"features", panel.num_features()},
            {"shift_months", config.shift_months},
            {"first_date", panel.dates().front().str()},
            {"last_date", panel.dates().back().str()}};
  }
  return panel;
}

ingest::RegimeCalendar load_regimes(const RunConfig& config) {
  if (config.calendar.empty()) return {};
  return ingest::load_calendar(read_text(config.calendar));
}

int cmd_ingest(const RunConfig& config, std::ostream& err) {
  try {
    json log;
    const auto panel = build_panel(config, &log);
    write_text(config.output_dir / "panel.csv", ingest::write_panel_csv(panel));
    write_text(config.output_dir / "ingest_log.json", log.dump(2) + "\n");
    err << "ingest: " << panel.rows() << " rows x " << panel.num_features() << " features ("
        << log["excluded_series"].size() << " series excluded, " << log["rows_dropped"] << " rows dropped)\n";
    return kOk;
  } catch (const std::exception& e) {
    return input_error(err, e);
  }
}

int cmd_backtest(const RunConfig& config, std::ostream& err) {
  std::optional<AlignedPanel> panel;
  ingest::RegimeCalendar calendar;
  try {
    panel = build_panel(config);
    calendar = load_regimes(config);
  } catch (const std::exception& e) {
    return input_error(err, e);
  }

  for (const auto& entry : config.selectors) {
    backtest::BacktestConfig bc;
    bc.window = config.window;
    bc.p = config.p;
    bc.selector_id = entry.id;
    bc.params = entry.params;
    bc.reselect_every = config.reselect_every;
    bc.seed = config.seed;
    bc.timeout_seconds = config.timeout_seconds;

    const fs::path path = ledger_path(config, entry.name);
    const fs::path partial = path.string() + ".partial";
    std::vector<backtest::LedgerRecord> done;
    try {
      const auto ledger =
          backtest::run_backtest(*panel, calendar, bc, [&](const backtest::LedgerRecord& r) { done.push_back(r); });
      write_text(path, backtest::ledger_csv(ledger));
      json m = backtest::manifest(ledger);
      m["selector_name"] = entry.name;
      write_text(config.output_dir / "ledgers" / (entry.name + ".manifest.json"), m.dump(2) + "\n");
      fs::remove(partial);
      err << "backtest " << entry.name << ": " << ledger.size() << " records\n";
    } catch (const std::exception& e) {
      try {
        write_text(partial, backtest::ledger_csv(done));
      } catch (const std::exception&) {
      }
      err << "error: backtest " << entry.name << " failed after " << done.size() << " records: " << e.what() << '\n';
      const auto* ce = dynamic_cast<const Error*>(&e);
      return ce && (ce->kind() == ErrorKind::InsufficientHistory || ce->kind() == ErrorKind::PreconditionViolated ||
                    ce->kind() == ErrorKind::ConfigError)
                 ? kInputError
                 : kFailure;
    }
  }
  return kOk;
}

int cmd_report(const RunConfig& config, std::ostream& err) {
  ingest::RegimeCalendar calendar;
  try {
    calendar = load_regimes(config);
  } catch (const std::exception& e) {
    return input_error(err, e);
  }
  std::vector<std::pair<std::string, backtest::BacktestLedger>> ledgers;
  for (const auto& entry : config.selectors) {
    const fs::path path = ledger_path(config, entry.name);
    if (!fs::is_regular_file(path)) {
      err << "error: missing ledger " << path.string() << " (run backtest first)\n";
      return kMissingArtifact;
    }
    try {
      ledgers.emplace_back(entry.name, backtest::read_ledger_csv(read_text(path)));
    } catch (const std::exception& e) {
      return input_error(err, e);
    }
  }

  const fs::path dir = config.output_dir / "report";
  try {
    std::vector<std::pair<std::string, evaluation::MetricsReport>> error_rows;
    std::vector<std::pair<std::string, evaluation::PortfolioReport>> portfolio_rows;
    std::map<std::string, evaluation::StrategySeries> strategies;
    json summary = {{"rolling_h", config.rolling_h}, {"models", json::object()}, {"portfolios", json::object()}};

    auto add_portfolio = [&](const std::string& name, const evaluation::StrategySeries& series) {
      write_text(dir / ("strategy_" + name + ".csv"), evaluation::strategy_csv(series));
      try {
        auto report = evaluation::portfolio_metrics(series, calendar);
        summary["portfolios"][name] = evaluation::to_json(report);
        portfolio_rows.emplace_back(name, std::move(report));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Insufficient) throw;
        err << "warning: " << name << ": " << e.what() << '\n';
        summary["portfolios"][name] = {{"flags", {e.what()}}};
      }
    };

    for (const auto& [name, ledger] : ledgers) {
      if (ledger.records.empty()) {
        err << "warning: ledger " << name << " is empty; skipped\n";
        continue;
      }
      auto metrics = evaluation::regime_metrics(ledger, calendar);
      summary["models"][name] = evaluation::to_json(metrics);
      error_rows.emplace_back(name, std::move(metrics));

      if (static_cast<std::size_t>(config.rolling_h) <= ledger.size()) {
        write_text(dir / ("rolling_rmse_" + name + ".csv"),
                   evaluation::dated_values_csv(evaluation::rolling_rmse(ledger, config.rolling_h)));
        write_text(dir / ("rolling_mae_" + name + ".csv"),
                   evaluation::dated_values_csv(evaluation::rolling_mae(ledger, config.rolling_h)));
      } else {
        err << "warning: " << name << ": rolling window " << config.rolling_h << " exceeds ledger length "
            << ledger.size() << "; rolling errors skipped\n";
      }
      write_text(dir / ("stability_" + name + ".csv"),
                 evaluation::stability_csv(evaluation::selection_stability(ledger)));
      strategies[name] = evaluation::strategy_returns(ledger);
      add_portfolio(name, strategies[name]);
    }

    if (!ledgers.empty() && !ledgers.front().second.records.empty())
      add_portfolio("buy_and_hold", evaluation::buy_and_hold(ledgers.front().second));
    if (config.combine.size() == 2 && strategies.count(config.combine[0]) && strategies.count(config.combine[1])) {
      const auto combined = evaluation::combine_portfolios(strategies[config.combine[0]], strategies[config.combine[1]],
                                                           config.combine_weight);
      add_portfolio(config.combine[0] + "+" + config.combine[1], combined);
    }

    write_text(dir / "table_errors.csv", evaluation::error_table_csv(error_rows));
    write_text(dir / "table_portfolio.csv", evaluation::portfolio_table_csv(portfolio_rows));
    write_text(dir / "metrics.json", summary.dump(2) + "\n");
    err << "report: " << error_rows.size() << " models written to " << dir.string() << '\n';
    return kOk;
  } catch (const std::exception& e) {
    return input_error(err, e);
  }
}

int cmd_validate(const fs::path& spec_path, const Overrides& overrides, std::ostream& err) {
  synthlab::SvarSpec base;
  std::vector<SelectorEntry> entries;
  int seeds = 20;
  std::uint64_t seed0 = 0;
  fs::path out_dir;
  try {
    const json doc = read_config_file(spec_path);
    for (auto it = doc.begin(); it != doc.end(); ++it)
      if (it.key() != "svar" && it.key() != "selectors" && it.key() != "seeds" && it.key() != "seed" &&
          it.key() != "output_dir")
        throw Error(ErrorKind::ConfigError, "validate spec: unknown key '" + it.key() + "'");
    base = synthlab::spec_from_json(doc.value("svar", json::object()));
    seeds = doc.value("seeds", seeds);
    seed0 = overrides.seed ? *overrides.seed : doc.value("seed", seed0);
    const fs::path base_dir = spec_path.has_parent_path() ? spec_path.parent_path() : fs::path(".");
    out_dir = overrides.output_dir ? *overrides.output_dir : base_dir / doc.value("output_dir", std::string("out"));
    if (seeds < 1) throw Error(ErrorKind::ConfigError, "validate spec: seeds must be >= 1");
    for (const auto& s : doc.value("selectors", json::array())) {
      SelectorEntry e;
      e.id = s.value("id", std::string());
      e.name = s.value("name", e.id);
      e.params = s.value("params", json::object());
      selectors::make_selector(e.id, e.params, base.p);
      if (overrides.selectors.empty() ||
          std::find(overrides.selectors.begin(), overrides.selectors.end(), e.name) != overrides.selectors.end())
        entries.push_back(std::move(e));
    }
    if (entries.empty()) throw Error(ErrorKind::ConfigError, "validate spec: no selectors to run");
  } catch (const std::exception& e) {
    return input_error(err, e);
  }

  std::vector<std::string> tables(entries.size(), "seed,precision,recall,f1,selected,true_parents,error\n");
  std::vector<std::array<double, 4>> sums(entries.size(), {0.0, 0.0, 0.0, 0.0});
  for (int s = 0; s < seeds; ++s) {
    auto spec = base;
    spec.seed = seed0 + static_cast<std::uint64_t>(s);
    std::optional<synthlab::SyntheticPanel> sample;
    try {
      sample = synthlab::generate_svar(spec);
    } catch (const Error& e) {
      err << "error: seed " << spec.seed << ": " << e.what() << '\n';
      return e.kind() == ErrorKind::GenerationFailed ? kGenerationFailed : kInputError;
    }
    const auto design = build_design(sample->panel, spec.p);
    const auto truth = synthlab::true_parents(sample->truth, sample->panel.target_name());
    for (std::size_t k = 0; k < entries.size(); ++k) {
      selectors::FeatureSet fs;
      std::string error;
      try {
        selectors::SelectorContext ctx;
        ctx.seed = spec.seed;
        fs = selectors::make_selector(entries[k].id, entries[k].params, spec.p)->select(sample->panel, design, ctx);
      } catch (const Error& e) {
        error = std::string(to_string(e.kind()));
      }
      const auto score = synthlab::score_sets(fs.selected, truth);
      auto join = [](const std::vector<std::string>& v) {
        std::string o;
        for (std::size_t i = 0; i < v.size(); ++i) o += (i ? ";" : "") + v[i];
        return o;
      };
      tables[k] += std::to_string(spec.seed) + ',' + ingest::format_double(score.precision) + ',' +
                   ingest::format_double(score.recall) + ',' + ingest::format_double(score.f1) + ',' + join(fs.selected) +
                   ',' + join(truth) + ',' + error + '\n';
      sums[k][0] += score.precision;
      sums[k][1] += score.recall;
      sums[k][2] += score.f1;
      sums[k][3] += static_cast<double>(fs.selected.size());
    }
  }

  try {
    std::string summary = "selector,seeds,mean_precision,mean_recall,mean_f1,mean_selected,selection_rate\n";
    for (std::size_t k = 0; k < entries.size(); ++k) {
      write_text(out_dir / "validate" / ("recovery_" + entries[k].name + ".csv"), tables[k]);
      const double n = seeds;
      summary += entries[k].name + ',' + std::to_string(seeds) + ',' + ingest::format_double(sums[k][0] / n) + ',' +
                 ingest::format_double(sums[k][1] / n) + ',' + ingest::format_double(sums[k][2] / n) + ',' +
                 ingest::format_double(sums[k][3] / n) + ',' + ingest::format_double(sums[k][3] / n / base.d) + '\n';
      err << "validate " << entries[k].name << ": mean F1 " << sums[k][2] / n << ", selection rate "
          << sums[k][3] / n / base.d << '\n';
    }
    write_text(out_dir / "validate" / "summary.csv", summary);
  } catch (const std::exception& e) {
    return input_error(err, e);
  }
  return kOk;
}

}  // namespace causalcast::cli
