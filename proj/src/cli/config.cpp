#include "causalcast/cli.hpp"

#include "causalcast/error.hpp"
#include "causalcast/registry.hpp"

#include <toml.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace causalcast::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json toml_to_json(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    json j = json::object();
    for (auto&& [key, value] : *t) j[std::string(key.str())] = toml_to_json(value);
    return j;
  }
  if (const auto* a = node.as_array()) {
    json j = json::array();
    for (const auto& value : *a) j.push_back(toml_to_json(value));
    return j;
  }
  if (const auto* s = node.as_string()) return s->get();
  if (const auto* i = node.as_integer()) return i->get();
  if (const auto* f = node.as_floating_point()) return f->get();
  if (const auto* b = node.as_boolean()) return b->get();
  std::ostringstream os;
  if (const auto* d = node.as_date()) os << d->get();
  else if (const auto* dt = node.as_date_time()) os << dt->get();
  else if (const auto* tm = node.as_time()) os << tm->get();
  return os.str();
}

void reject_unknown(const json& table, const std::set<std::string>& known, const std::string& where) {
  if (!table.is_object()) throw Error(ErrorKind::ConfigError, where + " must be a table");
  for (auto it = table.begin(); it != table.end(); ++it)
    if (!known.count(it.key())) throw Error(ErrorKind::ConfigError, where + ": unknown key '" + it.key() + "'");
}

template <typename T>
T read(const json& table, const std::string& key, T fallback, const std::string& where) {
  auto it = table.find(key);
  if (it == table.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::ConfigError, where + "." + key + " has the wrong type");
  }
}

fs::path resolve(const fs::path& base, const std::string& value) {
  if (value.empty()) return {};
  const fs::path p(value);
  return p.is_absolute() ? p : base / p;
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) throw Error(ErrorKind::ConfigError, what + " not found: " + p.string());
}

bool safe_name(const std::string& name) {
  if (name.empty()) return false;
  for (char c : name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
  return true;
}

}  // namespace

json read_config_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (path.extension() == ".json") {
    try {
      return json::parse(text);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ConfigError, path.string() + ": " + e.what());
    }
  }
  try {
    return toml_to_json(toml::parse(text, path.string()));
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << path.string() << ":" << e.source().begin.line << ": " << e.description();
    throw Error(ErrorKind::ConfigError, os.str());
  }
}

RunConfig parse_run_config(const json& doc, const fs::path& base_dir) {
  reject_unknown(doc, {"seed", "output_dir", "data", "backtest", "selectors", "metrics"}, "config");
  RunConfig c;
  c.seed = read<std::uint64_t>(doc, "seed", c.seed, "config");
  c.output_dir = resolve(base_dir, read<std::string>(doc, "output_dir", "out", "config"));

  const json data = doc.value("data", json::object());
  reject_unknown(data, {"fredmd_csv", "prices_csv", "groups_csv", "calendar", "shift_months", "target_name"}, "data");
  c.fredmd_csv = resolve(base_dir, read<std::string>(data, "fredmd_csv", "", "data"));
  c.prices_csv = resolve(base_dir, read<std::string>(data, "prices_csv", "", "data"));
  c.groups_csv = resolve(base_dir, read<std::string>(data, "groups_csv", "", "data"));
  c.calendar = resolve(base_dir, read<std::string>(data, "calendar", "", "data"));
  c.shift_months = read(data, "shift_months", c.shift_months, "data");
  c.target_name = read(data, "target_name", c.target_name, "data");
  if (c.fredmd_csv.empty() || c.prices_csv.empty())
    throw Error(ErrorKind::ConfigError, "data.fredmd_csv and data.prices_csv are required");
  require_file(c.fredmd_csv, "data.fredmd_csv");
  require_file(c.prices_csv, "data.prices_csv");
  if (!c.groups_csv.empty()) require_file(c.groups_csv, "data.groups_csv");
  if (!c.calendar.empty()) require_file(c.calendar, "data.calendar");
  if (c.shift_months < 0) throw Error(ErrorKind::ConfigError, "data.shift_months must be >= 0");

  const json bt = doc.value("backtest", json::object());
  reject_unknown(bt, {"window", "p", "reselect_every", "timeout_seconds"}, "backtest");
  c.window = read<Eigen::Index>(bt, "window", c.window, "backtest");
  c.p = read(bt, "p", c.p, "backtest");
  c.reselect_every = read(bt, "reselect_every", c.reselect_every, "backtest");
  c.timeout_seconds = read(bt, "timeout_seconds", c.timeout_seconds, "backtest");
  if (c.p < 1 || c.window <= c.p + 2 || c.reselect_every < 1 || c.timeout_seconds < 0.0)
    throw Error(ErrorKind::ConfigError, "backtest: need p >= 1, window > p + 2, reselect_every >= 1, timeout >= 0");

  const json sel = doc.value("selectors", json::array());
  if (!sel.is_array() || sel.empty()) throw Error(ErrorKind::ConfigError, "config needs at least one [[selectors]] entry");
  std::set<std::string> names;
  for (const auto& entry : sel) {
    reject_unknown(entry, {"id", "name", "params"}, "selectors");
    SelectorEntry e;
    e.id = read<std::string>(entry, "id", "", "selectors");
    e.name = read<std::string>(entry, "name", e.id, "selectors");
    e.params = entry.value("params", json::object());
    if (!safe_name(e.name)) throw Error(ErrorKind::ConfigError, "selector name '" + e.name + "' must match [A-Za-z0-9_.-]+");
    if (!names.insert(e.name).second) throw Error(ErrorKind::ConfigError, "duplicate selector name '" + e.name + "'");
    try {
      selectors::make_selector(e.id, e.params, c.p);
    } catch (const Error& err) {
      throw Error(ErrorKind::ConfigError, err.what());
    }
    c.selectors.push_back(std::move(e));
  }

  const json metrics = doc.value("metrics", json::object());
  reject_unknown(metrics, {"h", "combine", "combine_weight"}, "metrics");
  c.rolling_h = read(metrics, "h", c.rolling_h, "metrics");
  c.combine = read(metrics, "combine", c.combine, "metrics");
  c.combine_weight = read(metrics, "combine_weight", c.combine_weight, "metrics");
  if (c.rolling_h < 1) throw Error(ErrorKind::ConfigError, "metrics.h must be >= 1");
  if (!c.combine.empty()) {
    if (c.combine.size() != 2) throw Error(ErrorKind::ConfigError, "metrics.combine needs exactly two selector names");
    for (const auto& n : c.combine)
      if (!names.count(n)) throw Error(ErrorKind::ConfigError, "metrics.combine: unknown selector '" + n + "'");
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  return parse_run_config(read_config_file(path), path.has_parent_path() ? path.parent_path() : fs::path("."));
}

void apply_overrides(RunConfig& config, const Overrides& overrides) {
  if (overrides.seed) config.seed = *overrides.seed;
  if (overrides.output_dir) config.output_dir = *overrides.output_dir;
  if (!overrides.selectors.empty()) {
    std::vector<SelectorEntry> kept;
    for (const auto& name : overrides.selectors) {
      auto it = std::find_if(config.selectors.begin(), config.selectors.end(),
                             [&](const SelectorEntry& e) { return e.name == name; });
      if (it == config.selectors.end()) throw Error(ErrorKind::ConfigError, "--selectors: unknown selector '" + name + "'");
      kept.push_back(*it);
    }
    config.selectors = std::move(kept);
  }
}

}  // namespace causalcast::cli
