#include "causalcast/registry.hpp"

#include "causalcast/error.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace causalcast::selectors {

namespace {

using nlohmann::json;

// Reads typed keys from a params object and rejects leftovers.
class Params {
 public:
  Params(std::string id, const json& params) : id_(std::move(id)), params_(params.is_null() ? json::object() : params) {
    if (!params_.is_object()) throw Error(ErrorKind::ConfigError, id_ + ": params must be a table");
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    auto it = params_.find(key);
    if (it == params_.end()) return fallback;
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!it->is_number()) throw Error(ErrorKind::ConfigError, "");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!it->is_number_integer()) throw Error(ErrorKind::ConfigError, "");
      }
      return it->get<T>();
    } catch (const std::exception&) {
      throw Error(ErrorKind::ConfigError, id_ + ": parameter '" + key + "' has the wrong type");
    }
  }

  void finish() const {
    for (auto it = params_.begin(); it != params_.end(); ++it)
      if (!used_.count(it.key())) throw Error(ErrorKind::ConfigError, id_ + ": unknown parameter '" + it.key() + "'");
  }

 private:
  std::string id_;
  json params_;
  std::set<std::string> used_;
};

class FunctionSelector final : public Selector {
 public:
  using Fn = std::function<FeatureSet(const AlignedPanel&, const DesignMatrix&, const SelectorContext&)>;
  FunctionSelector(std::string id, Fn fn) : id_(std::move(id)), fn_(std::move(fn)) {}
  const std::string& id() const noexcept override { return id_; }
  FeatureSet select(const AlignedPanel& train, const DesignMatrix& design,
                    const SelectorContext& context) const override {
    FeatureSet out = fn_(train, design, context);
    out.selector_id = id_;
    return out;
  }

 private:
  std::string id_;
  Fn fn_;
};

std::vector<Environment> make_environments(const std::string& kind, const DesignMatrix& design,
                                           const SelectorContext& context) {
  if (kind == "halves") return contiguous_environments(design.rows(), 2);
  if (kind.rfind("blocks:", 0) == 0) return contiguous_environments(design.rows(), std::stoi(kind.substr(7)));
  // calendar
  if (!context.calendar) throw Error(ErrorKind::NeedEnvironments, "seqicp: calendar environments need a calendar");
  Environment normal{"normal", {}}, crisis{"crisis", {}};
  for (Eigen::Index r = 0; r < design.rows(); ++r)
    (context.calendar->classify(design.dates[static_cast<std::size_t>(r)]) == ingest::Regime::Crisis ? crisis : normal)
        .rows.push_back(r);
  if (normal.rows.empty() || crisis.rows.empty())
    throw Error(ErrorKind::NeedEnvironments, "seqicp: training window covers a single regime");
  return {normal, crisis};
}

FeatureSet empty_set(const std::string& id, const AlignedPanel& train) {
  FeatureSet out;
  out.selector_id = id;
  out.candidates = train.feature_names();
  for (const auto& name : out.candidates) out.diagnostics.push_back({name, kNaN, kNaN, kNaN});
  return out;
}

}  // namespace

const std::vector<std::string>& known_selectors() {
  static const std::vector<std::string> ids{"granger", "seqicp", "varlingam", "dynotears", "pcmci", "sfs", "fixed", "none"};
  return ids;
}

std::unique_ptr<Selector> make_selector(const std::string& id, const nlohmann::json& params, int p) {
  Params in(id, params);
  std::unique_ptr<Selector> out;

  if (id == "granger") {
    GrangerOptions o;
    o.alpha = in.get("alpha", o.alpha);
    out = std::make_unique<FunctionSelector>(
        id, [o](const AlignedPanel&, const DesignMatrix& design, const SelectorContext&) { return granger_select(design, o); });
  } else if (id == "seqicp") {
    SeqIcpOptions o;
    o.alpha = in.get("alpha", o.alpha);
    o.max_subset_size = in.get("max_subset_size", o.max_subset_size);
    o.include_target_lag = in.get("include_target_lag", o.include_target_lag);
    const auto envs = in.get<std::string>("environments", "halves");
    if (envs != "halves" && envs != "calendar" && envs.rfind("blocks:", 0) != 0)
      throw Error(ErrorKind::ConfigError, "seqicp: environments must be halves, calendar or blocks:<k>");
    if (envs.rfind("blocks:", 0) == 0) {
      const auto digits = envs.substr(7);
      if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos || std::stoi(digits) < 2)
        throw Error(ErrorKind::ConfigError, "seqicp: blocks:<k> needs an integer k >= 2");
    }
    out = std::make_unique<FunctionSelector>(
        id, [o, envs](const AlignedPanel&, const DesignMatrix& design, const SelectorContext& ctx) {
          auto opts = o;
          opts.deadline = ctx.deadline;
          return seqicp_select(design, make_environments(envs, design, ctx), opts);
        });
  } else if (id == "varlingam") {
    VarLingamOptions o;
    o.p = p;
    o.k_clusters = in.get("k_clusters", o.k_clusters);
    o.edge_threshold = in.get("edge_threshold", o.edge_threshold);
    o.use_instantaneous = in.get("use_instantaneous", o.use_instantaneous);
    o.use_lagged = in.get("use_lagged", o.use_lagged);
    o.ica_max_iter = in.get("ica_max_iter", o.ica_max_iter);
    o.ica_tol = in.get("ica_tol", o.ica_tol);
    out = std::make_unique<FunctionSelector>(
        id, [o](const AlignedPanel& train, const DesignMatrix&, const SelectorContext& ctx) {
          auto opts = o;
          opts.seed = ctx.seed;
          return varlingam_select(train, opts);
        });
  } else if (id == "dynotears") {
    DynotearsOptions o;
    o.p = p;
    o.lambda_w = in.get("lambda_w", o.lambda_w);
    o.lambda_s = in.get("lambda_s", o.lambda_s);
    o.h_tol = in.get("h_tol", o.h_tol);
    o.w_threshold = in.get("w_threshold", o.w_threshold);
    o.rho_max = in.get("rho_max", o.rho_max);
    o.max_outer = in.get("max_outer", o.max_outer);
    o.max_inner = in.get("max_inner", o.max_inner);
    out = std::make_unique<FunctionSelector>(
        id, [o](const AlignedPanel& train, const DesignMatrix&, const SelectorContext& ctx) {
          auto opts = o;
          opts.deadline = ctx.deadline;
          return dynotears_select(dynotears_fit(train, opts), train.target_name());
        });
  } else if (id == "pcmci") {
    PcmciOptions o;
    o.p = p;
    o.alpha = in.get("alpha", o.alpha);
    o.max_cond_dim = in.get("max_cond_dim", o.max_cond_dim);
    o.max_parents_stage1 = in.get("max_parents_stage1", o.max_parents_stage1);
    out = std::make_unique<FunctionSelector>(
        id, [o](const AlignedPanel& train, const DesignMatrix&, const SelectorContext& ctx) {
          auto opts = o;
          opts.deadline = ctx.deadline;
          return pcmci_select(train, opts);
        });
  } else if (id == "sfs") {
    SfsOptions o;
    const auto direction = in.get<std::string>("direction", "forward");
    if (direction != "forward" && direction != "backward")
      throw Error(ErrorKind::ConfigError, "sfs: direction must be forward or backward");
    o.direction = direction == "forward" ? SfsDirection::Forward : SfsDirection::Backward;
    o.tol = in.get("tol", o.tol);
    o.max_features = in.get("max_features", o.max_features);
    o.folds = in.get("folds", o.folds);
    out = std::make_unique<FunctionSelector>(
        id, [o](const AlignedPanel&, const DesignMatrix& design, const SelectorContext& ctx) {
          auto opts = o;
          opts.deadline = ctx.deadline;
          opts.seed = ctx.seed;
          return sfs_select(design, opts);
        });
  } else if (id == "fixed") {
    const auto names = in.get<std::vector<std::string>>("features", {});
    out = std::make_unique<FunctionSelector>(
        id, [names](const AlignedPanel& train, const DesignMatrix&, const SelectorContext&) {
          auto fs = empty_set("fixed", train);
          for (const auto& name : train.feature_names())
            if (std::find(names.begin(), names.end(), name) != names.end()) fs.selected.push_back(name);
          for (const auto& name : names)
            if (!train.feature_index(name)) throw Error(ErrorKind::BadName, "fixed: unknown feature '" + name + "'");
          return fs;
        });
  } else if (id == "none") {
    out = std::make_unique<FunctionSelector>(
        id, [](const AlignedPanel& train, const DesignMatrix&, const SelectorContext&) { return empty_set("none", train); });
  } else {
    throw Error(ErrorKind::BadName, "unknown selector '" + id + "'");
  }
  in.finish();
  return out;
}

}  // namespace causalcast::selectors
