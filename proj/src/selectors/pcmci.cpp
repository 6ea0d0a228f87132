#include "causalcast/error.hpp"
#include "causalcast/selectors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

namespace causalcast::selectors {

namespace {

struct LinkKey {
  int variable;
  int lag;
  friend bool operator==(const LinkKey&, const LinkKey&) = default;
  friend auto operator<=>(const LinkKey&, const LinkKey&) = default;
};

// Lagged views of [target | features] on the common sample t = 2p .. T-1, so
// that shifted parents of a lag-p link (lag up to 2p) stay in range.
class LaggedData {
 public:
  LaggedData(Matrix data, int max_lag) : data_(std::move(data)), max_lag_(max_lag) {
    if (data_.rows() <= max_lag_ + 3)
      throw Error(ErrorKind::InsufficientHistory, "pcmci: too few rows for the lag window");
  }

  Eigen::Index n() const { return data_.rows() - max_lag_; }
  int variables() const { return static_cast<int>(data_.cols()); }

  Vector column(LinkKey k) const { return data_.col(k.variable).segment(max_lag_ - k.lag, n()); }

  Matrix columns(const std::vector<LinkKey>& keys) const {
    Matrix Z(n(), static_cast<Eigen::Index>(keys.size()));
    for (std::size_t i = 0; i < keys.size(); ++i) Z.col(static_cast<Eigen::Index>(i)) = column(keys[i]);
    return Z;
  }

 private:
  Matrix data_;
  int max_lag_;
};

struct TestOutcome {
  double statistic = 0.0;
  double p_value = 1.0;
  bool skipped = false;
};

TestOutcome ci_test(const LaggedData& data, LinkKey x, LinkKey y, const std::vector<LinkKey>& conds) {
  TestOutcome out;
  if (data.n() - static_cast<Eigen::Index>(conds.size()) - 2 < 1) {
    out.skipped = true;
    out.p_value = 0.0;
    return out;
  }
  try {
    const auto r = numerics::partial_correlation(data.column(x), data.column(y), data.columns(conds));
    out.statistic = r.statistic;
    out.p_value = r.p_value;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateInput) throw;
    // x or y fully explained by the conditioning set: no residual dependence.
  }
  return out;
}

// PC1 condition selection for one variable at time t (lag 0).
std::vector<LaggedLink> pc1_parents(const LaggedData& data, int variable, const PcmciOptions& options,
                                    std::vector<std::string>& warnings) {
  struct Candidate {
    LinkKey key;
    double strength;
    double statistic;
    double p_value;
  };
  std::vector<Candidate> parents;
  for (int v = 0; v < data.variables(); ++v)
    for (int lag = 1; lag <= options.p; ++lag) parents.push_back({{v, lag}, std::numeric_limits<double>::infinity(), 0.0, 0.0});

  const LinkKey y{variable, 0};
  for (int q = 0; q <= options.max_cond_dim; ++q) {
    if (static_cast<int>(parents.size()) - 1 < q) break;
    std::vector<bool> drop(parents.size(), false);
    for (std::size_t i = 0; i < parents.size(); ++i) {
      options.deadline.check("pcmci");
      std::vector<LinkKey> conds;
      for (std::size_t j = 0; j < parents.size() && static_cast<int>(conds.size()) < q; ++j)
        if (j != i) conds.push_back(parents[j].key);
      const auto t = ci_test(data, parents[i].key, y, conds);
      if (t.skipped) {
        warnings.push_back("SkippedTest: conditioning set of " + std::to_string(conds.size()) + " too large for n=" +
                           std::to_string(data.n()) + "; link retained");
        continue;
      }
      parents[i].strength = std::min(parents[i].strength, std::fabs(t.statistic));
      parents[i].statistic = t.statistic;
      parents[i].p_value = t.p_value;
      if (t.p_value >= options.alpha) drop[i] = true;
    }
    std::vector<Candidate> kept;
    for (std::size_t i = 0; i < parents.size(); ++i)
      if (!drop[i]) kept.push_back(parents[i]);
    std::stable_sort(kept.begin(), kept.end(), [](const Candidate& a, const Candidate& b) { return a.strength > b.strength; });
    parents = std::move(kept);
  }
  if (static_cast<int>(parents.size()) > options.max_parents_stage1) parents.resize(static_cast<std::size_t>(options.max_parents_stage1));

  std::vector<LaggedLink> out;
  for (const auto& c : parents) out.push_back({c.key.variable, c.key.lag, c.statistic, c.p_value, false});
  return out;
}

}  // namespace

PcmciResult pcmci_fit(const AlignedPanel& panel, const PcmciOptions& options) {
  if (options.p < 1) throw Error(ErrorKind::PreconditionViolated, "pcmci: p must be >= 1");
  if (options.max_cond_dim < 0 || options.max_parents_stage1 < 1)
    throw Error(ErrorKind::PreconditionViolated, "pcmci: max_cond_dim >= 0 and max_parents_stage1 >= 1 required");
  const LaggedData data(panel.joint(), 2 * options.p);

  PcmciResult out;
  auto& fs = out.features;
  fs.selector_id = "pcmci";
  fs.candidates = panel.feature_names();

  out.stage1_parents = pc1_parents(data, 0, options, fs.warnings);

  std::map<int, std::vector<LaggedLink>> parent_cache;
  auto parents_of = [&](int v) -> const std::vector<LaggedLink>& {
    auto it = parent_cache.find(v);
    if (it == parent_cache.end()) it = parent_cache.emplace(v, pc1_parents(data, v, options, fs.warnings)).first;
    return it->second;
  };

  const LinkKey y{0, 0};
  std::vector<std::optional<LaggedLink>> best(static_cast<std::size_t>(panel.num_features()));
  std::vector<bool> selected(static_cast<std::size_t>(panel.num_features()), false);
  for (const auto& link : out.stage1_parents) {
    if (link.variable == 0) continue;  // the target's own lags are conditioning, not candidates
    const LinkKey x{link.variable, link.lag};
    std::vector<LinkKey> conds;
    for (const auto& pa : out.stage1_parents)
      if (!(pa.variable == link.variable && pa.lag == link.lag)) conds.push_back({pa.variable, pa.lag});
    for (const auto& pa : parents_of(link.variable)) {
      const LinkKey shifted{pa.variable, pa.lag + link.lag};
      if (std::find(conds.begin(), conds.end(), shifted) == conds.end() && !(shifted == x)) conds.push_back(shifted);
    }
    options.deadline.check("pcmci");
    const auto t = ci_test(data, x, y, conds);
    LaggedLink tested{link.variable, link.lag, t.statistic, t.p_value, t.skipped};
    if (t.skipped)
      fs.warnings.push_back("SkippedTest: MCI conditioning set too large for link from " +
                            panel.feature_names()[static_cast<std::size_t>(link.variable - 1)] + "; link retained");
    out.mci_links.push_back(tested);
    const auto f = static_cast<std::size_t>(link.variable - 1);
    if (t.skipped || t.p_value < options.alpha) selected[f] = true;
    if (!best[f] || tested.p_value < best[f]->p_value) best[f] = tested;
  }

  for (std::size_t f = 0; f < selected.size(); ++f) {
    const auto& name = panel.feature_names()[f];
    if (best[f])
      fs.diagnostics.push_back({name, best[f]->statistic, best[f]->p_value, kNaN});
    else
      fs.diagnostics.push_back({name, kNaN, 1.0, kNaN});
    if (selected[f]) fs.selected.push_back(name);
  }
  return out;
}

FeatureSet pcmci_select(const AlignedPanel& panel, const PcmciOptions& options) {
  return pcmci_fit(panel, options).features;
}

}  // namespace causalcast::selectors
