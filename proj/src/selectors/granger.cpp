#include "causalcast/error.hpp"
#include "causalcast/selectors.hpp"

#include <algorithm>

namespace causalcast::selectors {

FeatureSet granger_select(const DesignMatrix& design, const GrangerOptions& options) {
  const auto d = static_cast<Eigen::Index>(design.feature_names.size());
  FeatureSet out;
  out.selector_id = "granger";
  out.candidates = design.feature_names;

  numerics::OlsFit full;
  try {
    full = numerics::ols_fit(design.X, design.y, true);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Underdetermined)
      throw Error(ErrorKind::Underdetermined,
                  std::string(e.what()) + "; reduce the candidate set (e.g. the clustering pre-filter) or p");
    throw;
  }
  out.warnings = full.warnings;

  for (Eigen::Index i = 0; i < d; ++i) {
    const auto drop = design.feature_columns(i);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index c = 0; c < design.X.cols(); ++c)
      if (std::find(drop.begin(), drop.end(), c) == drop.end()) keep.push_back(c);
    Matrix restricted_X(design.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) restricted_X.col(static_cast<Eigen::Index>(k)) = design.X.col(keep[k]);
    const auto restricted = numerics::ols_fit(restricted_X, design.y, true);

    // Effective restriction count and residual dof follow the numerical ranks,
    // which equal p and n - k whenever the design has full column rank.
    const auto q = static_cast<int>(full.rank - restricted.rank);
    numerics::FTestResult test;
    if (q >= 1) test = numerics::f_test_nested(restricted.rss, full.rss, q, full.n, full.rank);
    const auto& name = design.feature_names[static_cast<std::size_t>(i)];
    out.diagnostics.push_back({name, test.statistic, test.p_value, kNaN});
    if (test.p_value < options.alpha) out.selected.push_back(name);
  }
  return out;
}

}  // namespace causalcast::selectors
