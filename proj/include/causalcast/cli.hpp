#pragma once

#include "causalcast/ingest.hpp"
#include "causalcast/panel.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace causalcast::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kInputError = 2, kMissingArtifact = 3, kGenerationFailed = 4 };

struct SelectorEntry {
  std::string name;  // output label; defaults to id
  std::string id;
  nlohmann::json params = nlohmann::json::object();
};

struct RunConfig {
  std::filesystem::path fredmd_csv;
  std::filesystem::path prices_csv;
  std::filesystem::path groups_csv;  // optional
  std::filesystem::path calendar;    // optional
  int shift_months = 1;
  std::string target_name = "SPY";

  Eigen::Index window = 60;
  int p = 1;
  int reselect_every = 1;
  double timeout_seconds = 0.0;
  std::vector<SelectorEntry> selectors;

  int rolling_h = 12;
  std::vector<std::string> combine;  // two selector names, or empty
  double combine_weight = 0.5;

  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
};

/// TOML, or JSON when the file ends in .json. Relative paths resolve against
/// the config file's directory. Throws ConfigError.
nlohmann::json read_config_file(const std::filesystem::path& path);
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
  std::vector<std::string> selectors;  // names to keep; empty keeps all
};
/// Throws ConfigError for an unknown selector name.
void apply_overrides(RunConfig& config, const Overrides& overrides);

/// Reads, transforms and aligns the configured inputs. `log` receives the ingestion summary.
AlignedPanel build_panel(const RunConfig& config, nlohmann::json* log = nullptr);
ingest::RegimeCalendar load_regimes(const RunConfig& config);

int cmd_ingest(const RunConfig& config, std::ostream& err);
int cmd_backtest(const RunConfig& config, std::ostream& err);
int cmd_report(const RunConfig& config, std::ostream& err);
int cmd_validate(const std::filesystem::path& spec_path, const Overrides& overrides, std::ostream& err);

/// Full command-line entry point (subcommand parsing included).
int run(int argc, char** argv);

}  // namespace causalcast::cli
