#include "causalcast/error.hpp"
#include "causalcast/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace causalcast::numerics {

namespace {
constexpr double kRankThreshold = 1e-10;
}

OlsFit ols_fit(const Matrix& X, const Vector& y, bool intercept) {
  if (X.rows() != y.size()) throw Error(ErrorKind::ShapeError, "ols_fit: rows(X) != len(y)");
  const Eigen::Index n = X.rows();
  const Eigen::Index k = X.cols() + (intercept ? 1 : 0);
  if (n <= k)
    throw Error(ErrorKind::Underdetermined,
                std::to_string(n) + " observations for " + std::to_string(k) + " regressors");

  Matrix A(n, k);
  if (intercept) {
    A.col(0).setOnes();
    A.rightCols(X.cols()) = X;
  } else {
    A = X;
  }

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  cod.setThreshold(kRankThreshold);
  cod.compute(A);

  OlsFit fit;
  fit.beta = cod.solve(y);
  fit.residuals = y - A * fit.beta;
  fit.rss = fit.residuals.squaredNorm();
  fit.n = n;
  fit.k = k;
  fit.rank = cod.rank();
  fit.has_intercept = intercept;
  fit.rank_deficient = fit.rank < k;
  if (fit.rank_deficient)
    fit.warnings.push_back("RankDeficient: design rank " + std::to_string(fit.rank) + " < " + std::to_string(k) +
                           " columns; minimum-norm solution returned");
  return fit;
}

FTestResult f_test_nested(double rss_restricted, double rss_full, int q, Eigen::Index n, Eigen::Index k_full) {
  if (q < 1) throw Error(ErrorKind::PreconditionViolated, "f_test_nested: q must be >= 1");
  if (n <= k_full) throw Error(ErrorKind::PreconditionViolated, "f_test_nested: n must exceed k_full");
  if (rss_full < 0.0) rss_full = 0.0;
  FTestResult out;
  out.df1 = q;
  out.df2 = static_cast<int>(n - k_full);
  const double gap = std::max(0.0, rss_restricted - rss_full);
  if (rss_full == 0.0) {
    if (gap > 0.0) {
      out.statistic = std::numeric_limits<double>::infinity();
      out.p_value = 0.0;
      out.infinite = true;
    }
    return out;
  }
  out.statistic = (gap / q) / (rss_full / static_cast<double>(out.df2));
  out.p_value = f_sf(out.statistic, out.df1, out.df2);
  return out;
}

double pearson(const Vector& x, const Vector& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorKind::ShapeError, "pearson: need equal lengths >= 2");
  const Vector xc = x.array() - x.mean();
  const Vector yc = y.array() - y.mean();
  const double sxx = xc.squaredNorm(), syy = yc.squaredNorm();
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorKind::DegenerateInput, "pearson: zero variance input");
  const double r = xc.dot(yc) / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

PartialCorrelation partial_correlation(const Vector& x, const Vector& y, const Matrix& Z) {
  if (x.size() != y.size() || Z.rows() != x.size())
    throw Error(ErrorKind::ShapeError, "partial_correlation: inconsistent lengths");
  const Eigen::Index n = x.size();
  if (n <= Z.cols() + 2)
    throw Error(ErrorKind::Underdetermined, "partial_correlation: n must exceed |Z| + 2");

  Vector rx, ry;
  if (Z.cols() == 0) {
    rx = x.array() - x.mean();
    ry = y.array() - y.mean();
  } else {
    rx = ols_fit(Z, x, true).residuals;
    ry = ols_fit(Z, y, true).residuals;
  }
  // Residuals at round-off level relative to the input count as zero.
  const double sx = rx.squaredNorm(), sy = ry.squaredNorm();
  const double scale_x = (x.array() - x.mean()).matrix().squaredNorm();
  const double scale_y = (y.array() - y.mean()).matrix().squaredNorm();
  if (sx <= 1e-24 * scale_x || sy <= 1e-24 * scale_y)
    throw Error(ErrorKind::DegenerateInput, "partial_correlation: residual has zero variance");

  PartialCorrelation out;
  out.statistic = std::clamp(rx.dot(ry) / std::sqrt(sx * sy), -1.0, 1.0);
  out.dof = static_cast<double>(n - Z.cols() - 2);
  const double denom = 1.0 - out.statistic * out.statistic;
  if (denom <= 0.0) {
    out.p_value = 0.0;
  } else {
    out.p_value = t_two_sided(out.statistic * std::sqrt(out.dof / denom), out.dof);
  }
  return out;
}

Matrix standardize(const Matrix& X) {
  if (X.rows() < 2) throw Error(ErrorKind::DegenerateInput, "standardize: need at least 2 rows");
  Matrix out(X.rows(), X.cols());
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const Vector col = X.col(c).array() - X.col(c).mean();
    const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(X.rows() - 1));
    if (!(sd > 0.0)) throw Error(ErrorKind::DegenerateInput, "standardize: constant column " + std::to_string(c));
    out.col(c) = col / sd;
  }
  return out;
}

}  // namespace causalcast::numerics
