#include "causalcast/numerics.hpp"

#include "../support/oracles.hpp"
#include "helpers.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <random>

using namespace causalcast;
using namespace causalcast::numerics;

namespace {

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Matrix M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = n01(rng);
  return M;
}

// Composite Simpson on the F density after the substitution f = u / (1 - u).
double f_sf_quadrature(double f, double d1, double d2) {
  const double lb = std::lgamma(0.5 * (d1 + d2)) - std::lgamma(0.5 * d1) - std::lgamma(0.5 * d2);
  auto pdf = [&](double x) {
    if (x <= 0.0) return 0.0;
    return std::exp(lb + 0.5 * d1 * std::log(d1 / d2) + (0.5 * d1 - 1.0) * std::log(x) -
                    0.5 * (d1 + d2) * std::log1p(d1 * x / d2));
  };
  const double a = f / (1.0 + f), b = 1.0;
  const int m = 200000;
  const double h = (b - a) / m;
  auto g = [&](double u) { return u >= 1.0 ? 0.0 : pdf(u / (1.0 - u)) / ((1.0 - u) * (1.0 - u)); };
  double s = g(a) + g(b);
  for (int i = 1; i < m; ++i) s += g(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

double objective(const Matrix& points, const std::vector<int>& assign, const Matrix& centroids) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    s += (points.row(i) - centroids.row(assign[static_cast<std::size_t>(i)])).squaredNorm();
  return s;
}

}  // namespace

TEST_CASE("special functions agree with Boost.Math") {
  for (double a : {0.5, 1.0, 2.5, 7.0, 30.0})
    for (double b : {0.5, 1.5, 4.0, 60.0})
      for (double x : {0.01, 0.2, 0.5, 0.8, 0.99})
        CHECK(incomplete_beta(a, b, x) == doctest::Approx(boost::math::ibeta(a, b, x)).epsilon(1e-10));
  for (double a : {0.5, 1.0, 3.0, 10.0, 50.0})
    for (double x : {0.1, 1.0, 5.0, 20.0, 80.0})
      CHECK(incomplete_gamma(a, x) == doctest::Approx(boost::math::gamma_p(a, x)).epsilon(1e-10));
  CHECK(incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(incomplete_beta(2.0, 3.0, 1.0) == 1.0);
}

TEST_CASE("distribution tails agree with Boost.Math") {
  for (double d1 : {1.0, 2.0, 5.0})
    for (double d2 : {10.0, 47.0, 480.0})
      for (double f : {0.1, 1.0, 2.2, 6.0}) {
        const boost::math::fisher_f dist(d1, d2);
        CHECK(f_sf(f, d1, d2) == doctest::Approx(boost::math::cdf(boost::math::complement(dist, f))).epsilon(1e-9));
      }
  for (double df : {3.0, 17.0, 300.0})
    for (double t : {-3.0, -0.4, 0.0, 1.2, 2.5}) {
      const boost::math::students_t dist(df);
      CHECK(t_two_sided(t, df) ==
            doctest::Approx(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)))).epsilon(1e-9));
    }
  for (double df : {1.0, 4.0, 30.0})
    for (double x : {0.5, 3.0, 40.0}) {
      const boost::math::chi_squared dist(df);
      CHECK(chi2_sf(x, df) == doctest::Approx(boost::math::cdf(boost::math::complement(dist, x))).epsilon(1e-9));
    }
}

TEST_CASE("OLS exact fits") {
  Matrix X(3, 1);
  X << 1, 2, 3;
  Vector y(3);
  y << 2, 4, 6;
  const OlsFit f = ols_fit(X, y, false);
  CHECK(f.beta.size() == 1);
  CHECK(f.beta[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(f.rss == doctest::Approx(0.0).epsilon(1e-20));

  std::mt19937_64 rng(1);
  const Matrix Z = gaussian(20, 3, rng);
  const OlsFit c = ols_fit(Z, Vector::Constant(20, 4.25), true);
  CHECK(c.beta[0] == doctest::Approx(4.25).epsilon(1e-12));
  for (Eigen::Index j = 1; j < c.beta.size(); ++j) CHECK(std::abs(c.beta[j]) < 1e-12);
  CHECK(c.rss < 1e-20);
}

TEST_CASE("OLS matches the normal-equations oracle and its invariants") {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix X = gaussian(30, 4, rng);
    const Vector y = gaussian(30, 1, rng).col(0);
    const OlsFit fit = ols_fit(X, y, true);
    const Vector ref = oracle::ols_normal(X, y);
    for (Eigen::Index j = 0; j < ref.size(); ++j)
      CHECK(std::abs(fit.beta[j] - ref[j]) <= 1e-8 * std::max(1.0, std::abs(ref[j])));
    CHECK(fit.rss == doctest::Approx(fit.residuals.squaredNorm()).epsilon(1e-14));
    CHECK(fit.rss == doctest::Approx(oracle::rss_normal(X, y)).epsilon(1e-10));
    CHECK(std::abs(fit.residuals.sum()) <= 1e-8 * y.norm());
    for (Eigen::Index j = 0; j < X.cols(); ++j) CHECK(std::abs(X.col(j).dot(fit.residuals)) <= 1e-8 * y.norm());
    // projection idempotence
    const Vector fitted = y - fit.residuals;
    const OlsFit again = ols_fit(X, fitted, true);
    CHECK((again.beta - fit.beta).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("OLS rank deficiency and underdetermined systems") {
  std::mt19937_64 rng(3);
  Matrix X = gaussian(25, 3, rng);
  X.col(2) = X.col(1);
  const Vector y = gaussian(25, 1, rng).col(0);
  const OlsFit f = ols_fit(X, y, true);
  CHECK(f.rank_deficient);
  CHECK(f.rank == 3);
  REQUIRE(!f.warnings.empty());
  CHECK(f.warnings.front().rfind("RankDeficient", 0) == 0);
  CHECK(f.beta[2] == doctest::Approx(f.beta[3]).epsilon(1e-10));  // minimum norm splits the weight
  CHECK_KIND(ols_fit(gaussian(3, 3, rng), Vector::Zero(3), true), ErrorKind::Underdetermined);
}

TEST_CASE("nested F test examples") {
  const FTestResult same = f_test_nested(10.0, 10.0, 2, 20, 3);
  CHECK(same.statistic == 0.0);
  CHECK(same.p_value == 1.0);

  const FTestResult r = f_test_nested(12.0, 10.0, 2, 20, 3);
  CHECK(r.statistic == doctest::Approx(1.7).epsilon(1e-14));
  CHECK(r.df1 == 2);
  CHECK(r.df2 == 17);
  CHECK(r.p_value == doctest::Approx(f_sf_quadrature(1.7, 2, 17)).epsilon(1e-8));

  double last = -1.0;
  for (double rr = 10.5; rr < 30.0; rr += 1.5) {
    const double s = f_test_nested(rr, 10.0, 2, 20, 3).statistic;
    CHECK(s > last);
    last = s;
  }
  const FTestResult inf = f_test_nested(1.0, 0.0, 1, 10, 2);
  CHECK(inf.infinite);
  CHECK(inf.p_value == 0.0);
  CHECK(f_test_nested(9.0, 10.0, 1, 10, 2).statistic == 0.0);  // negative gap clamps
}

TEST_CASE("nested F test is uniform under the null (KS at 1%)") {
  std::mt19937_64 rng(4);
  std::vector<double> ps;
  const int n = 60;
  for (int rep = 0; rep < 1000; ++rep) {
    const Matrix X = gaussian(n, 3, rng);
    const Vector y = gaussian(n, 1, rng).col(0);
    const double full = ols_fit(X, y, true).rss;
    const double restricted = ols_fit(X.leftCols(1), y, true).rss;
    ps.push_back(f_test_nested(restricted, full, 2, n, 4).p_value);
  }
  std::sort(ps.begin(), ps.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double lo = static_cast<double>(i) / 1000.0, hi = static_cast<double>(i + 1) / 1000.0;
    ks = std::max({ks, std::abs(ps[i] - lo), std::abs(hi - ps[i])});
  }
  CHECK(ks < 1.63 / std::sqrt(1000.0));
}

TEST_CASE("pearson correlation") {
  std::mt19937_64 rng(5);
  const Vector x = gaussian(50, 1, rng).col(0);
  const Vector y = gaussian(50, 1, rng).col(0) + 0.3 * x;
  CHECK(pearson(x, x) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(pearson(x, -x) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(std::abs(pearson(x, y) - oracle::corr(x, y)) < 1e-12);
  CHECK_KIND(pearson(x, Vector::Constant(50, 2.0)), ErrorKind::DegenerateInput);
}

TEST_CASE("partial correlation reductions") {
  std::mt19937_64 rng(6);
  const Vector x = gaussian(80, 1, rng).col(0);
  const Vector y = gaussian(80, 1, rng).col(0) + 0.5 * x;
  const PartialCorrelation pc = partial_correlation(x, y, Matrix(80, 0));
  CHECK(pc.statistic == doctest::Approx(pearson(x, y)).epsilon(1e-12));
  CHECK(pc.dof == 78.0);
  const double t = pc.statistic * std::sqrt(78.0 / (1.0 - pc.statistic * pc.statistic));
  const boost::math::students_t dist(78.0);
  CHECK(pc.p_value == doctest::Approx(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)))).epsilon(1e-9));

  const Matrix Z = gaussian(80, 2, rng);
  Vector a(2);
  a << 0.7, -1.3;
  CHECK_KIND(partial_correlation(x, Z * a, Z), ErrorKind::DegenerateInput);
}

TEST_CASE("partial correlation recovers a constructed value") {
  // x = z + e1, y = z + e2 with corr(e1, e2) = 0.5, so the partial correlation given z is 0.5.
  const double rho = 0.5;
  const int n = 400;
  int inside = 0;
  double sum = 0.0;
  for (int s = 0; s < 200; ++s) {
    std::mt19937_64 rng(1000 + s);
    std::normal_distribution<double> n01;
    Vector x(n), y(n);
    Matrix z(n, 1);
    for (int i = 0; i < n; ++i) {
      const double zi = n01(rng), u = n01(rng), v = n01(rng);
      z(i, 0) = zi;
      x[i] = zi + u;
      y[i] = zi + rho * u + std::sqrt(1 - rho * rho) * v;
    }
    const double r = partial_correlation(x, y, z).statistic;
    sum += r;
    if (std::abs(r - rho) <= 3.0 * (1 - rho * rho) / std::sqrt(n - 3.0)) ++inside;
  }
  CHECK(inside >= 195);
  CHECK(std::abs(sum / 200 - rho) < 3.0 * (1 - rho * rho) / std::sqrt((n - 3.0) * 200));
}

TEST_CASE("k-means separation, singletons, monotone objective, determinism") {
  std::mt19937_64 rng(7);
  Matrix two = 0.5 * gaussian(40, 2, rng);
  two.bottomRows(20).array() += 100.0;
  const KMeansResult km = kmeans(two, 2, 1);
  for (int i = 1; i < 20; ++i) CHECK(km.assignments[static_cast<std::size_t>(i)] == km.assignments[0]);
  for (int i = 21; i < 40; ++i) CHECK(km.assignments[static_cast<std::size_t>(i)] == km.assignments[20]);
  CHECK(km.assignments[0] != km.assignments[20]);

  const Matrix pts = gaussian(12, 3, rng);
  const KMeansResult single = kmeans(pts, 12, 3);
  CHECK(objective(pts, single.assignments, single.centroids) < 1e-20);
  std::vector<int> sorted = single.assignments;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::unique(sorted.begin(), sorted.end()) == sorted.end());

  for (unsigned seed = 0; seed < 10; ++seed) {
    const Matrix data = gaussian(200, 4, rng);
    const KMeansResult r = kmeans(data, 5, seed);
    for (std::size_t i = 1; i < r.objective.size(); ++i) CHECK(r.objective[i] <= r.objective[i - 1] + 1e-9);
    CHECK(r.objective.back() == doctest::Approx(objective(data, r.assignments, r.centroids)).epsilon(1e-10));
    CHECK(kmeans(data, 5, seed).assignments == r.assignments);
  }
  CHECK_KIND(kmeans(pts, 13, 0), ErrorKind::BadK);
}

TEST_CASE("FastICA unmixes uniform sources and whitens") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = 5000;
  Matrix S(n, 2);
  for (int i = 0; i < n; ++i) S(i, 0) = u(rng), S(i, 1) = u(rng);
  Matrix A(2, 2);
  A << 1, 0.5, 0.5, 1;
  const Matrix X = S * A.transpose();
  const IcaResult r = fastica(X, 2, 9);
  CHECK(r.converged);
  for (int c = 0; c < 2; ++c) {
    const double best = std::max(std::abs(oracle::corr(r.sources.col(c), S.col(0))),
                                 std::abs(oracle::corr(r.sources.col(c), S.col(1))));
    CHECK(best >= 0.95);
  }
  const Matrix C = (r.sources.transpose() * r.sources) / (n - 1.0);
  CHECK((C - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-4);

  const IcaResult id = fastica(S, 2, 10);
  const Matrix M = id.mixing;  // up to scale, sign and order of the identity
  for (int c = 0; c < 2; ++c) {
    const double big = M.col(c).cwiseAbs().maxCoeff(), small = M.col(c).cwiseAbs().minCoeff();
    CHECK(small < 0.05 * big);
  }
}

TEST_CASE("FastICA on Gaussian sources still whitens") {
  std::mt19937_64 rng(12);
  const Matrix X = gaussian(3000, 3, rng) * (Matrix(3, 3) << 1, 0.2, 0, 0.4, 1, 0.3, 0, 0.1, 1).finished();
  const IcaResult r = fastica(X, 3, 1);
  const Matrix C = (r.sources.transpose() * r.sources) / (3000 - 1.0);
  CHECK((C - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("acyclicity function") {
  const Acyclicity zero = acyclicity(Matrix::Zero(4, 4));
  CHECK(zero.h == 0.0);
  CHECK(zero.gradient.cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(13);
  Matrix upper = gaussian(5, 5, rng).triangularView<Eigen::StrictlyUpper>();
  CHECK(std::abs(acyclicity(upper).h) < 1e-12);

  for (double a : {1.0, 0.3, 1.7}) {
    Matrix two(2, 2);
    two << 0, a, a, 0;
    CHECK(acyclicity(two).h == doctest::Approx(2.0 * std::cosh(a * a) - 2.0).epsilon(1e-12));
  }
  Matrix one(2, 2);
  one << 0, 1, 1, 0;
  CHECK(acyclicity(one).h == doctest::Approx(1.0862).epsilon(1e-4));

  for (int rep = 0; rep < 10; ++rep) {
    const Matrix S = 0.5 * gaussian(5, 5, rng);
    const Matrix G = acyclicity(S).gradient;
    const double step = 1e-6;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        Matrix up = S, dn = S;
        up(i, j) += step;
        dn(i, j) -= step;
        const double fd = (acyclicity(up).h - acyclicity(dn).h) / (2 * step);
        CHECK(std::abs(fd - G(i, j)) <= 1e-5 * std::max(1.0, std::abs(G(i, j))));
      }
  }
}

TEST_CASE("standardize") {
  std::mt19937_64 rng(14);
  const Matrix X = 3.0 * gaussian(50, 3, rng).array() + 7.0;
  const Matrix Z = standardize(X);
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(Z.col(j).mean()) < 1e-12);
    CHECK((Z.col(j).array() - Z.col(j).mean()).matrix().squaredNorm() / 49.0 == doctest::Approx(1.0).epsilon(1e-12));
  }
  Matrix c = X;
  c.col(1).setConstant(2.0);
  CHECK_KIND(standardize(c), ErrorKind::DegenerateInput);
}
