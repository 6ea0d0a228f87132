#include "causalcast/cli.hpp"
#include "causalcast/error.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace causalcast::cli {

namespace {

std::vector<std::string> split_names(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream in(csv);
  for (std::string name; std::getline(in, name, ',');)
    if (!name.empty()) out.push_back(name);
  return out;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Causal feature selection and expanding-window forecasting backtests"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string selector_list;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "TOML or JSON config file")->required();
    sub->add_option("--seed", seed, "override the configured seed");
    sub->add_option("--out", out_dir, "override the output directory");
    sub->add_option("--selectors", selector_list, "comma-separated selector names to run");
  };
  auto* ingest = app.add_subcommand("ingest", "parse, transform and align the inputs into panel.csv");
  auto* backtest = app.add_subcommand("backtest", "run one expanding-window backtest per selector");
  auto* report = app.add_subcommand("report", "evaluate ledgers into tables and plot-ready CSVs");
  auto* validate = app.add_subcommand("validate", "score selectors on synthetic structural VARs");
  for (auto* sub : {ingest, backtest, report, validate}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  Overrides overrides;
  auto* active = app.get_subcommands().front();
  if (active->count("--seed")) overrides.seed = seed;
  if (active->count("--out")) overrides.output_dir = out_dir;
  overrides.selectors = split_names(selector_list);

  if (active == validate) return cmd_validate(config_path, overrides, std::cerr);

  RunConfig config;
  try {
    config = load_run_config(config_path);
    apply_overrides(config, overrides);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  if (active == ingest) return cmd_ingest(config, std::cerr);
  if (active == backtest) return cmd_backtest(config, std::cerr);
  return cmd_report(config, std::cerr);
}

}  // namespace causalcast::cli
