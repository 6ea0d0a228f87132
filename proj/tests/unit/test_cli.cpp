#include "causalcast/backtest.hpp"
#include "causalcast/cli.hpp"
#include "causalcast/evaluation.hpp"
#include "causalcast/synthlab.hpp"

#include "helpers.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace causalcast;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "causalcast");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

/// Fresh copy of the toy fixtures in a scratch directory.
struct Sandbox {
  fs::path dir;
  explicit Sandbox(const std::string& name) {
    dir = fs::temp_directory_path() / ("causalcast_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    for (const auto& e : fs::directory_iterator(fs::path(CAUSALCAST_FIXTURES) / "toy")) fs::copy(e.path(), dir / e.path().filename());
  }
  ~Sandbox() { fs::remove_all(dir); }
  fs::path config() const { return dir / "run.toml"; }
  fs::path out() const { return dir / "out"; }
};

std::vector<std::string> column(const std::string& csv, std::size_t col) {
  std::vector<std::string> out;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto cells = ingest::split_csv_line(line);
    out.push_back(col < cells.size() ? cells[col] : "");
  }
  return out;
}

}  // namespace

TEST_CASE("ingest on the toy fixtures writes a 12-row panel and logs the group-6 exclusion") {
  Sandbox box("ingest");
  const std::string before = slurp(box.dir / "fredmd.csv");
  CHECK(run_cli({"ingest", "--config", box.config().string()}) == cli::kOk);
  const AlignedPanel panel = ingest::read_panel_csv(slurp(box.out() / "panel.csv"));
  CHECK(panel.rows() == 12);
  CHECK(panel.num_features() == 3);
  CHECK(!panel.feature_index("S&P 500").has_value());
  const json log = json::parse(slurp(box.out() / "ingest_log.json"));
  CHECK(log["excluded_series"] == json::array({"S&P 500"}));
  CHECK(log["panel_rows"] == 12);
  CHECK(slurp(box.dir / "fredmd.csv") == before);
}

TEST_CASE("configuration errors exit 2") {
  Sandbox box("config");
  CHECK(run_cli({"ingest", "--config", (box.dir / "absent.toml").string()}) == cli::kInputError);
  fs::remove(box.dir / "prices.csv");
  CHECK(run_cli({"ingest", "--config", box.config().string()}) == cli::kInputError);

  Sandbox other("config2");
  std::string text = slurp(other.config());
  spit(other.dir / "typo.toml", text + "\n[extras]\nfoo = 1\n");
  CHECK(run_cli({"ingest", "--config", (other.dir / "typo.toml").string()}) == cli::kInputError);
  std::string bad_id = text;
  bad_id.replace(bad_id.find("id = \"none\""), 11, "id = \"lasso\"");
  spit(other.dir / "bad_id.toml", bad_id);
  CHECK(run_cli({"backtest", "--config", (other.dir / "bad_id.toml").string()}) == cli::kInputError);
  CHECK(run_cli({"backtest", "--config", other.config().string(), "--selectors", "nope"}) == cli::kInputError);
  CHECK(run_cli({"frobnicate"}) == cli::kInputError);
  CHECK(run_cli({}) == cli::kInputError);
}

TEST_CASE("backtest writes one ledger per selector with shared dates and a manifest") {
  Sandbox box("backtest");
  CHECK(run_cli({"backtest", "--config", box.config().string()}) == cli::kOk);
  const std::string a = slurp(box.out() / "ledgers" / "baseline.csv");
  const std::string b = slurp(box.out() / "ledgers" / "indpro.csv");
  CHECK(column(a, 0).size() == 12 - 6);
  CHECK(column(a, 0) == column(b, 0));
  for (const auto& s : column(b, 4)) CHECK(s == "INDPRO");
  const json m = json::parse(slurp(box.out() / "ledgers" / "baseline.manifest.json"));
  CHECK(m["seed"] == 7);
  CHECK(m.contains("config_hash"));

  CHECK(run_cli({"backtest", "--config", box.config().string()}) == cli::kOk);
  CHECK(slurp(box.out() / "ledgers" / "baseline.csv") == a);
  CHECK(slurp(box.out() / "ledgers" / "indpro.csv") == b);

  const fs::path alt = box.dir / "alt";
  CHECK(run_cli({"backtest", "--config", box.config().string(), "--out", alt.string(), "--selectors", "indpro"}) == cli::kOk);
  CHECK(fs::exists(alt / "ledgers" / "indpro.csv"));
  CHECK(!fs::exists(alt / "ledgers" / "baseline.csv"));
}

TEST_CASE("report matches direct evaluation calls and flags missing regimes") {
  Sandbox box("report");
  CHECK(run_cli({"report", "--config", box.config().string()}) == cli::kMissingArtifact);
  REQUIRE(run_cli({"backtest", "--config", box.config().string()}) == cli::kOk);
  REQUIRE(run_cli({"report", "--config", box.config().string()}) == cli::kOk);
  const fs::path dir = box.out() / "report";
  for (const char* f : {"table_errors.csv", "table_portfolio.csv", "metrics.json", "rolling_rmse_baseline.csv",
                        "rolling_mae_indpro.csv", "stability_indpro.csv", "strategy_baseline.csv"})
    CHECK_MESSAGE(fs::exists(dir / f), f);

  const auto ledger = backtest::read_ledger_csv(slurp(box.out() / "ledgers" / "indpro.csv"));
  const auto cal = ingest::load_calendar(slurp(box.dir / "calendar.txt"));
  const auto direct = evaluation::regime_metrics(ledger, cal);
  const json metrics = json::parse(slurp(dir / "metrics.json"));
  CHECK(metrics["models"]["indpro"] == evaluation::to_json(direct));
  CHECK(slurp(dir / "rolling_rmse_indpro.csv") == evaluation::dated_values_csv(evaluation::rolling_rmse(ledger, 3)));
  CHECK(metrics["portfolios"].contains("baseline+indpro"));

  std::string calm = slurp(box.config());
  calm.replace(calm.find("calendar = \"calendar.txt\""), 25, "calendar = \"calm.txt\"");
  spit(box.dir / "calm.txt", "# no crises\n");
  spit(box.dir / "calm.toml", calm);
  REQUIRE(run_cli({"report", "--config", (box.dir / "calm.toml").string()}) == cli::kOk);
  const json m2 = json::parse(slurp(dir / "metrics.json"));
  CHECK(m2["models"]["indpro"]["crisis"].is_null());
  CHECK(m2["models"]["indpro"]["mae_increase_pct"].is_null());
  CHECK(!m2["models"]["indpro"]["flags"].empty());
  for (const auto& v : column(slurp(dir / "table_errors.csv"), 2)) CHECK(v.empty());

  fs::remove(box.out() / "ledgers" / "indpro.csv");
  CHECK(run_cli({"report", "--config", box.config().string()}) == cli::kMissingArtifact);
}

TEST_CASE("backtest on an exported synthetic panel is byte-identical across reruns") {
  const fs::path dir = fs::temp_directory_path() / "causalcast_cli_synth";
  fs::remove_all(dir);
  synthlab::SvarSpec spec;
  spec.d = 4;
  spec.n = 90;
  spec.target_parents = 2;
  spec.seed = 12;
  const auto files = ingest::export_ingest_csv(synthlab::generate_svar(spec).panel, 1);
  spit(dir / "fredmd.csv", files.fredmd_csv);
  spit(dir / "prices.csv", files.prices_csv);
  spit(dir / "groups.csv", files.groups_csv);
  spit(dir / "run.toml",
       "seed = 3\n[data]\nfredmd_csv = \"fredmd.csv\"\nprices_csv = \"prices.csv\"\ngroups_csv = \"groups.csv\"\n"
       "[backtest]\nwindow = 50\n[[selectors]]\nid = \"granger\"\n[[selectors]]\nid = \"varlingam\"\n"
       "[[selectors]]\nid = \"seqicp\"\nparams = { environments = \"blocks:3\" }\n");
  REQUIRE(run_cli({"backtest", "--config", (dir / "run.toml").string()}) == cli::kOk);
  const std::string g1 = slurp(dir / "out" / "ledgers" / "granger.csv");
  const std::string v1 = slurp(dir / "out" / "ledgers" / "varlingam.csv");
  REQUIRE(run_cli({"backtest", "--config", (dir / "run.toml").string()}) == cli::kOk);
  CHECK(slurp(dir / "out" / "ledgers" / "granger.csv") == g1);
  CHECK(slurp(dir / "out" / "ledgers" / "varlingam.csv") == v1);
  CHECK(column(g1, 0).size() == 40);
  fs::remove_all(dir);
}

TEST_CASE("validate sweeps selectors and maps failures to exit codes") {
  const fs::path dir = fs::temp_directory_path() / "causalcast_cli_validate";
  fs::remove_all(dir);
  spit(dir / "chain.toml",
       "seeds = 20\nseed = 100\n[svar]\nd = 10\nn = 500\ntarget_parents = 3\n"
       "[[selectors]]\nid = \"granger\"\n");
  REQUIRE(run_cli({"validate", "--config", (dir / "chain.toml").string()}) == cli::kOk);
  const std::string summary = slurp(dir / "out" / "validate" / "summary.csv");
  CHECK(std::stod(column(summary, 4).at(0)) >= 0.9);
  CHECK(column(slurp(dir / "out" / "validate" / "recovery_granger.csv"), 0).size() == 20);

  spit(dir / "null.toml",
       "seeds = 40\n[svar]\nd = 10\nn = 500\nedge_density = 0.0\n[[selectors]]\nid = \"granger\"\n");
  REQUIRE(run_cli({"validate", "--config", (dir / "null.toml").string(), "--out", (dir / "null").string()}) == cli::kOk);
  const double rate = std::stod(column(slurp(dir / "null" / "validate" / "summary.csv"), 6).at(0));
  CHECK(std::abs(rate - 0.05) <= 0.03);

  spit(dir / "unknown.toml", "[svar]\nd = 3\n[[selectors]]\nid = \"lasso\"\n");
  CHECK(run_cli({"validate", "--config", (dir / "unknown.toml").string()}) == cli::kInputError);
  spit(dir / "frozen.toml", "seeds = 1\n[svar]\nd = 3\nmax_spectral_radius = 0.0\nedge_density = 0.5\n[[selectors]]\nid = \"granger\"\n");
  CHECK(run_cli({"validate", "--config", (dir / "frozen.toml").string()}) == cli::kGenerationFailed);
  fs::remove_all(dir);
}
