#include "causalcast/error.hpp"
#include "causalcast/selectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace causalcast::selectors {

std::vector<int> hungarian(const Matrix& cost) {
  const auto n = static_cast<int>(cost.rows());
  if (cost.cols() != cost.rows()) throw Error(ErrorKind::ShapeError, "hungarian: cost must be square");
  const double inf = std::numeric_limits<double>::infinity();
  // Potentials u (rows), v (cols); p[j] = row matched to column j (1-based, 0 = none).
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) assignment[static_cast<std::size_t>(p[j] - 1)] = j - 1;
  return assignment;
}

namespace {

// Sum of squared B0 entries that point backwards in `order`.
double order_violation(const Matrix& B0, const std::vector<int>& order) {
  double cost = 0.0;
  for (std::size_t a = 0; a < order.size(); ++a)
    for (std::size_t b = a + 1; b < order.size(); ++b) cost += B0(order[a], order[b]) * B0(order[a], order[b]);
  return cost;
}

}  // namespace

LingamOrdering lingam_ordering(const Matrix& unmixing) {
  const Eigen::Index m = unmixing.rows();
  if (unmixing.cols() != m) throw Error(ErrorKind::ShapeError, "lingam_ordering: unmixing must be square");

  // Assign each unmixing row to the variable it loads on most (min sum 1/|w|).
  Matrix cost(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const double a = std::fabs(unmixing(i, j));
      cost(i, j) = a > 0.0 ? 1.0 / a : 1e300;
    }
  const auto assignment = hungarian(cost);
  Matrix W(m, m);
  for (Eigen::Index i = 0; i < m; ++i) W.row(assignment[static_cast<std::size_t>(i)]) = unmixing.row(i);
  for (Eigen::Index j = 0; j < m; ++j) W.row(j) /= W(j, j);

  LingamOrdering out;
  out.instantaneous = Matrix::Identity(m, m) - W;
  out.instantaneous.diagonal().setZero();

  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  if (m <= 8) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_order = order;
    do {
      const double c = order_violation(out.instantaneous, order);
      if (c < best) {
        best = c;
        best_order = order;
      }
    } while (std::next_permutation(order.begin(), order.end()));
    out.order = best_order;
  } else {
    std::vector<int> remaining = order;
    out.order.clear();
    while (!remaining.empty()) {
      std::size_t pick = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < remaining.size(); ++a) {
        double c = 0.0;
        for (int j : remaining)
          if (j != remaining[a]) c += out.instantaneous(remaining[a], j) * out.instantaneous(remaining[a], j);
        if (c < best) {
          best = c;
          pick = a;
        }
      }
      out.order.push_back(remaining[pick]);
      remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
    }
  }
  return out;
}

std::vector<Eigen::Index> correlation_prefilter(const AlignedPanel& panel, int k_clusters, std::uint64_t seed) {
  const Eigen::Index d = panel.num_features();
  std::vector<Eigen::Index> usable;
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto& col = panel.features().col(j);
    if ((col.array() - col.mean()).abs().maxCoeff() > 0.0) usable.push_back(j);
  }
  if (k_clusters <= 0 || k_clusters >= static_cast<int>(usable.size())) return usable;

  Matrix columns(panel.rows(), static_cast<Eigen::Index>(usable.size()));
  for (std::size_t k = 0; k < usable.size(); ++k) columns.col(static_cast<Eigen::Index>(k)) = panel.features().col(usable[k]);
  const Matrix points = numerics::standardize(columns).transpose();
  const auto clusters = numerics::kmeans(points, k_clusters, seed);

  std::vector<Eigen::Index> best(static_cast<std::size_t>(k_clusters), -1);
  std::vector<double> best_corr(static_cast<std::size_t>(k_clusters), -1.0);
  for (std::size_t k = 0; k < usable.size(); ++k) {
    const auto c = static_cast<std::size_t>(clusters.assignments[k]);
    const double r = std::fabs(numerics::pearson(panel.features().col(usable[k]), panel.target()));
    if (r > best_corr[c]) {
      best_corr[c] = r;
      best[c] = usable[k];
    }
  }
  std::vector<Eigen::Index> kept;
  for (auto b : best)
    if (b >= 0) kept.push_back(b);
  std::sort(kept.begin(), kept.end());
  return kept;
}

VarLingamResult varlingam_fit(const AlignedPanel& panel, const VarLingamOptions& options) {
  if (options.p < 1) throw Error(ErrorKind::PreconditionViolated, "varlingam: p must be >= 1");
  const Eigen::Index T = panel.rows();
  VarLingamResult out;
  out.kept = correlation_prefilter(panel, options.k_clusters, options.seed);
  const auto kept_count = static_cast<Eigen::Index>(out.kept.size());
  if (kept_count >= T - 1)
    throw Error(ErrorKind::TooManyCovariates, std::to_string(kept_count) + " covariates for " + std::to_string(T) +
                                                  " observations; use more clusters-based filtering");

  const Eigen::Index m = 1 + kept_count;
  Matrix joint(T, m);
  joint.col(0) = panel.target();
  out.variables.push_back(panel.target_name());
  for (Eigen::Index k = 0; k < kept_count; ++k) {
    joint.col(1 + k) = panel.features().col(out.kept[static_cast<std::size_t>(k)]);
    out.variables.push_back(panel.feature_names()[static_cast<std::size_t>(out.kept[static_cast<std::size_t>(k)])]);
  }
  joint = numerics::standardize(joint);

  Matrix X, Xlag;
  lagged_system(joint, options.p, X, Xlag);
  const Eigen::Index n = X.rows();
  if (n <= 1 + Xlag.cols() + 1)
    throw Error(ErrorKind::TooManyCovariates, "VAR(" + std::to_string(options.p) + ") on " + std::to_string(m) +
                                                  " variables needs more than " + std::to_string(n) + " rows");

  // Equation-wise OLS with intercept, all equations share the regressors.
  Matrix A(n, 1 + Xlag.cols());
  A.col(0).setOnes();
  A.rightCols(Xlag.cols()) = Xlag;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  cod.setThreshold(1e-10);
  cod.compute(A);
  if (cod.rank() < A.cols()) out.warnings.push_back("RankDeficient: VAR regressors are collinear");
  const Matrix coef = cod.solve(X);
  const Matrix residuals = X - A * coef;

  std::vector<Matrix> reduced;  // B_tau(i, j): j_{t-tau} -> i_t
  for (int tau = 0; tau < options.p; ++tau) reduced.push_back(coef.middleRows(1 + tau * m, m).transpose());

  const auto ica = numerics::fastica(residuals, static_cast<int>(m), options.seed, options.ica_max_iter, options.ica_tol);
  for (const auto& w : ica.warnings) out.warnings.push_back(w);
  const auto ordering = lingam_ordering(ica.unmixing);
  out.causal_order = ordering.order;

  // Re-estimate the contemporaneous matrix by regressing each residual on its
  // predecessors in the causal order.
  out.instantaneous = Matrix::Zero(m, m);
  for (std::size_t pos = 1; pos < ordering.order.size(); ++pos) {
    const int i = ordering.order[pos];
    Matrix Z(n, static_cast<Eigen::Index>(pos));
    for (std::size_t q = 0; q < pos; ++q) Z.col(static_cast<Eigen::Index>(q)) = residuals.col(ordering.order[q]);
    const auto fit = numerics::ols_fit(Z, residuals.col(i), false);
    for (std::size_t q = 0; q < pos; ++q) out.instantaneous(i, ordering.order[q]) = fit.beta[static_cast<Eigen::Index>(q)];
  }
  const Matrix I_minus_A0 = Matrix::Identity(m, m) - out.instantaneous;
  for (const auto& B : reduced) out.lagged.push_back(I_minus_A0 * B);

  auto& fs = out.features;
  fs.selector_id = "varlingam";
  fs.candidates = panel.feature_names();
  fs.warnings = out.warnings;
  for (Eigen::Index j = 0; j < panel.num_features(); ++j) {
    const auto& name = panel.feature_names()[static_cast<std::size_t>(j)];
    auto it = std::find(out.kept.begin(), out.kept.end(), j);
    double weight = 0.0;
    if (it != out.kept.end()) {
      const Eigen::Index v = 1 + (it - out.kept.begin());
      if (options.use_instantaneous) weight = std::max(weight, std::fabs(out.instantaneous(0, v)));
      if (options.use_lagged)
        for (const auto& At : out.lagged) weight = std::max(weight, std::fabs(At(0, v)));
    }
    fs.diagnostics.push_back({name, kNaN, kNaN, weight});
    if (weight > options.edge_threshold) fs.selected.push_back(name);
  }
  return out;
}

FeatureSet varlingam_select(const AlignedPanel& panel, const VarLingamOptions& options) {
  return varlingam_fit(panel, options).features;
}

}  // namespace causalcast::selectors
