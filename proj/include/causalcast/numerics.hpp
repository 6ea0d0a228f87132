#pragma once

#include "causalcast/panel.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace causalcast::numerics {

// ---------------------------------------------------------------------------
// Distributions

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);
/// Regularized lower incomplete gamma P(a, x).
double incomplete_gamma(double a, double x);

/// Upper tail 1 - CDF of F(df1, df2) at `f`.
double f_sf(double f, double df1, double df2);
/// Two-sided p-value of a Student-t statistic.
double t_two_sided(double t, double df);
/// Upper tail of chi-square(df).
double chi2_sf(double x, double df);

// ---------------------------------------------------------------------------
// Least squares

struct OlsFit {
  Vector beta;        // intercept first when has_intercept
  Vector residuals;
  double rss = 0.0;
  Eigen::Index n = 0;
  Eigen::Index k = 0;  // regressors including the intercept column
  Eigen::Index rank = 0;
  bool has_intercept = false;
  bool rank_deficient = false;
  std::vector<std::string> warnings;
};

/// Least squares via complete orthogonal decomposition. A rank-deficient
/// design yields the minimum-norm solution and a RankDeficient warning.
OlsFit ols_fit(const Matrix& X, const Vector& y, bool intercept);

struct FTestResult {
  double statistic = 0.0;
  int df1 = 0;
  int df2 = 0;
  double p_value = 1.0;
  bool infinite = false;  // rss_full == 0 with a positive gap
};

/// Nested-model F test: F = ((rss_r - rss_f)/q) / (rss_f/(n - k_full)).
FTestResult f_test_nested(double rss_restricted, double rss_full, int q, Eigen::Index n, Eigen::Index k_full);

// ---------------------------------------------------------------------------
// Correlation

double pearson(const Vector& x, const Vector& y);

struct PartialCorrelation {
  double statistic = 0.0;  // partial correlation coefficient
  double p_value = 1.0;
  double dof = 0.0;
};

/// Correlation of the OLS residuals of x and y on [1, Z]; t-test with
/// n - |Z| - 2 degrees of freedom. Throws DegenerateInput when either residual
/// vector has zero variance.
PartialCorrelation partial_correlation(const Vector& x, const Vector& y, const Matrix& Z);

/// Column-wise z-scores (sample stdev). Constant columns throw DegenerateInput.
Matrix standardize(const Matrix& X);

// ---------------------------------------------------------------------------
// Clustering

struct KMeansResult {
  std::vector<int> assignments;
  Matrix centroids;               // k x dims
  std::vector<double> objective;  // within-cluster SS after each iteration
  int iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding; rows of `points` are the points.
KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iter = 300);

// ---------------------------------------------------------------------------
// ICA

struct IcaResult {
  Matrix unmixing;  // components x signals, applied to centered data
  Matrix mixing;    // signals x components (pseudo-inverse of unmixing)
  Matrix sources;   // samples x components
  Vector mean;
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

/// Symmetric FastICA with the tanh contrast. `X` is samples x signals.
/// Whitening uses the eigendecomposition of the sample covariance; recovered
/// sources have identity sample covariance.
IcaResult fastica(const Matrix& X, int n_components, std::uint64_t seed, int max_iter = 500, double tol = 1e-5);

// ---------------------------------------------------------------------------
// Acyclicity

struct Acyclicity {
  double h = 0.0;
  Matrix gradient;
};

/// h(S) = tr(exp(S o S)) - d and its gradient 2 exp(S o S)^T o S.
Acyclicity acyclicity(const Matrix& S);

}  // namespace causalcast::numerics
