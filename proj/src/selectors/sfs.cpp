#include "causalcast/error.hpp"
#include "causalcast/selectors.hpp"

#include <algorithm>
#include <cmath>

namespace causalcast::selectors {

double cv_mse(const Matrix& X, const Vector& y, int folds) {
  const Eigen::Index n = y.size();
  if (folds < 2 || folds > n) throw Error(ErrorKind::PreconditionViolated, "cv_mse: folds must be in 2..n");
  const Eigen::Index base = n / folds, extra = n % folds;
  double sse = 0.0;
  Eigen::Index start = 0;
  for (int f = 0; f < folds; ++f) {
    const Eigen::Index len = base + (f < extra ? 1 : 0);
    const Eigen::Index train_n = n - len;
    Matrix Xtr(train_n, X.cols());
    Vector ytr(train_n);
    Xtr.topRows(start) = X.topRows(start);
    Xtr.bottomRows(n - start - len) = X.bottomRows(n - start - len);
    ytr.head(start) = y.head(start);
    ytr.tail(n - start - len) = y.tail(n - start - len);
    const auto fit = numerics::ols_fit(Xtr, ytr, true);
    const Vector pred = (X.middleRows(start, len) * fit.beta.tail(X.cols())).array() + fit.beta[0];
    sse += (y.segment(start, len) - pred).squaredNorm();
    start += len;
  }
  return sse / static_cast<double>(n);
}

SfsResult sfs_fit(const DesignMatrix& design, const SfsOptions& options) {
  const auto d = static_cast<int>(design.feature_names.size());
  if (design.rows() <= options.max_features + 1)
    throw Error(ErrorKind::PreconditionViolated, "sfs: need more rows than max_features + 1");

  auto score = [&](const std::vector<Eigen::Index>& features) {
    options.deadline.check("sfs");
    return cv_mse(design.gather(features, options.include_target_lag), design.y, options.folds);
  };

  SfsResult out;
  std::vector<Eigen::Index> current;
  if (options.direction == SfsDirection::Backward)
    for (int f = 0; f < d; ++f) current.push_back(f);
  double current_mse = score(current);
  out.baseline_mse = current_mse;

  if (options.direction == SfsDirection::Forward) {
    while (static_cast<int>(current.size()) < std::min(options.max_features, d)) {
      int best = -1;
      double best_mse = std::numeric_limits<double>::infinity();
      for (int f = 0; f < d; ++f) {
        if (std::find(current.begin(), current.end(), f) != current.end()) continue;
        auto trial = current;
        trial.push_back(f);
        std::sort(trial.begin(), trial.end());
        const double mse = score(trial);
        if (mse < best_mse) {
          best_mse = mse;
          best = f;
        }
      }
      if (best < 0 || !(current_mse - best_mse >= options.tol)) break;
      current.push_back(best);
      std::sort(current.begin(), current.end());
      out.path.push_back(best);
      out.path_mse.push_back(best_mse);
      current_mse = best_mse;
    }
  } else {
    while (!current.empty()) {
      int best = -1;
      double best_mse = std::numeric_limits<double>::infinity();
      for (auto f : current) {
        std::vector<Eigen::Index> trial;
        for (auto g : current)
          if (g != f) trial.push_back(g);
        const double mse = score(trial);
        if (mse < best_mse) {
          best_mse = mse;
          best = static_cast<int>(f);
        }
      }
      const bool improves = current_mse - best_mse >= options.tol;
      if (!improves && static_cast<int>(current.size()) <= options.max_features) break;
      current.erase(std::find(current.begin(), current.end(), best));
      out.path.push_back(best);
      out.path_mse.push_back(best_mse);
      current_mse = best_mse;
    }
  }

  auto& fs = out.features;
  fs.selector_id = "sfs";
  fs.candidates = design.feature_names;
  for (int f = 0; f < d; ++f) {
    const auto& name = design.feature_names[static_cast<std::size_t>(f)];
    Diagnostic diag{name, kNaN, kNaN, 0.0};
    auto it = std::find(out.path.begin(), out.path.end(), f);
    if (it != out.path.end()) {
      const auto step = it - out.path.begin();
      diag.statistic = out.path_mse[static_cast<std::size_t>(step)];
      diag.weight = static_cast<double>(step + 1);
    }
    fs.diagnostics.push_back(diag);
    if (std::find(current.begin(), current.end(), f) != current.end()) fs.selected.push_back(name);
  }
  return out;
}

FeatureSet sfs_select(const DesignMatrix& design, const SfsOptions& options) { return sfs_fit(design, options).features; }

}  // namespace causalcast::selectors
