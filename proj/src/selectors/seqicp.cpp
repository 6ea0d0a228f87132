#include "causalcast/error.hpp"
#include "causalcast/selectors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace causalcast::selectors {

std::vector<Environment> contiguous_environments(Eigen::Index rows, int count) {
  if (count < 1 || rows < count) throw Error(ErrorKind::PreconditionViolated, "contiguous_environments: bad count");
  std::vector<Environment> out;
  const Eigen::Index base = rows / count, extra = rows % count;
  Eigen::Index start = 0;
  for (int e = 0; e < count; ++e) {
    const Eigen::Index len = base + (e < extra ? 1 : 0);
    Environment env;
    env.label = "block" + std::to_string(e + 1);
    for (Eigen::Index r = start; r < start + len; ++r) env.rows.push_back(r);
    out.push_back(std::move(env));
    start += len;
  }
  return out;
}

namespace {

Matrix take_rows(const Matrix& X, const std::vector<Eigen::Index>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
  return out;
}

Vector take(const Vector& v, const std::vector<Eigen::Index>& rows) {
  Vector out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[rows[i]];
  return out;
}

double bartlett_p(const Vector& residuals, const std::vector<Environment>& environments) {
  const auto E = static_cast<double>(environments.size());
  double N = 0.0, pooled = 0.0, log_sum = 0.0, inv_sum = 0.0;
  int zero = 0;
  std::vector<double> variances;
  for (const auto& env : environments) {
    const Vector r = take(residuals, env.rows);
    const double n = static_cast<double>(r.size());
    const double var = (r.array() - r.mean()).square().sum() / (n - 1.0);
    if (!(var > 0.0)) ++zero;
    variances.push_back(var);
    N += n;
    pooled += (n - 1.0) * var;
    inv_sum += 1.0 / (n - 1.0);
  }
  if (zero == static_cast<int>(environments.size())) return 1.0;
  if (zero > 0) return 0.0;
  pooled /= (N - E);
  for (std::size_t e = 0; e < environments.size(); ++e)
    log_sum += (static_cast<double>(environments[e].rows.size()) - 1.0) * std::log(variances[e]);
  const double stat = ((N - E) * std::log(pooled) - log_sum) / (1.0 + (inv_sum - 1.0 / (N - E)) / (3.0 * (E - 1.0)));
  return numerics::chi2_sf(std::max(stat, 0.0), E - 1.0);
}

}  // namespace

InvarianceTest invariance_test(const Matrix& X, const Vector& y, const std::vector<Environment>& environments) {
  if (environments.size() < 2) throw Error(ErrorKind::NeedEnvironments, "invariance test needs >= 2 environments");
  const Eigen::Index k = X.cols() + 1;
  const auto pooled = numerics::ols_fit(X, y, true);
  double rss_separate = 0.0;
  for (const auto& env : environments) {
    if (static_cast<Eigen::Index>(env.rows.size()) <= k)
      throw Error(ErrorKind::PreconditionViolated, "environment '" + env.label + "' has too few rows for the subset");
    rss_separate += numerics::ols_fit(take_rows(X, env.rows), take(y, env.rows), true).rss;
  }
  const auto E = static_cast<Eigen::Index>(environments.size());
  InvarianceTest out;
  out.chow_p = numerics::f_test_nested(pooled.rss, rss_separate, static_cast<int>((E - 1) * k), y.size(), E * k).p_value;
  out.bartlett_p = bartlett_p(pooled.residuals, environments);
  out.p_value = std::min(1.0, 2.0 * std::min(out.chow_p, out.bartlett_p));
  return out;
}

SeqIcpResult seqicp_fit(const DesignMatrix& design, const std::vector<Environment>& environments,
                        const SeqIcpOptions& options) {
  if (environments.size() < 2) throw Error(ErrorKind::NeedEnvironments, "seqICP needs at least two environments");
  std::set<Eigen::Index> seen;
  for (const auto& env : environments)
    for (auto r : env.rows) {
      if (r < 0 || r >= design.rows() || !seen.insert(r).second)
        throw Error(ErrorKind::PreconditionViolated, "environments must partition the design rows");
    }
  if (static_cast<Eigen::Index>(seen.size()) != design.rows())
    throw Error(ErrorKind::PreconditionViolated, "environments must cover every design row");

  const auto d = static_cast<int>(design.feature_names.size());
  const int max_size = std::clamp(options.max_subset_size, 0, d);
  SeqIcpResult out;
  auto& fs = out.features;
  fs.selector_id = "seqicp";
  fs.candidates = design.feature_names;
  std::vector<double> best_p_without(static_cast<std::size_t>(d), 0.0);
  std::size_t skipped = 0;

  std::vector<int> subset;
  // Enumerate subsets by size, lexicographic within a size.
  for (int size = 0; size <= max_size; ++size) {
    std::vector<int> idx(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
      options.deadline.check("seqicp");
      std::vector<Eigen::Index> features(idx.begin(), idx.end());
      try {
        const auto test = invariance_test(design.gather(features, options.include_target_lag), design.y, environments);
        ++out.tested;
        for (int f = 0; f < d; ++f)
          if (std::find(idx.begin(), idx.end(), f) == idx.end())
            best_p_without[static_cast<std::size_t>(f)] = std::max(best_p_without[static_cast<std::size_t>(f)], test.p_value);
        if (test.p_value > options.alpha) out.accepted.push_back(idx);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::PreconditionViolated && e.kind() != ErrorKind::Underdetermined) throw;
        ++skipped;
      }
      // next combination
      int pos = size - 1;
      while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == d - size + pos) --pos;
      if (pos < 0) break;
      ++idx[static_cast<std::size_t>(pos)];
      for (int j = pos + 1; j < size; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  if (skipped > 0) fs.warnings.push_back(std::to_string(skipped) + " subsets skipped: too few rows per environment");

  std::vector<int> intersection;
  if (out.accepted.empty()) {
    fs.empty_informative = true;
  } else {
    intersection = out.accepted.front();
    for (const auto& s : out.accepted) {
      std::vector<int> next;
      std::set_intersection(intersection.begin(), intersection.end(), s.begin(), s.end(), std::back_inserter(next));
      intersection = std::move(next);
    }
  }
  for (int f = 0; f < d; ++f) {
    const auto& name = design.feature_names[static_cast<std::size_t>(f)];
    fs.diagnostics.push_back({name, kNaN, best_p_without[static_cast<std::size_t>(f)], kNaN});
    if (std::find(intersection.begin(), intersection.end(), f) != intersection.end()) fs.selected.push_back(name);
  }
  return out;
}

FeatureSet seqicp_select(const DesignMatrix& design, const std::vector<Environment>& environments,
                         const SeqIcpOptions& options) {
  return seqicp_fit(design, environments, options).features;
}

}  // namespace causalcast::selectors
