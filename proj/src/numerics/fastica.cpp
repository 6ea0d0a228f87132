#include "causalcast/error.hpp"
#include "causalcast/numerics.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace causalcast::numerics {

namespace {

// W <- (W W^T)^{-1/2} W
Matrix symmetric_decorrelation(const Matrix& W) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(W * W.transpose());
  const Vector inv_sqrt = es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose() * W;
}

}  // namespace

IcaResult fastica(const Matrix& X, int n_components, std::uint64_t seed, int max_iter, double tol) {
  const Eigen::Index n = X.rows(), m = X.cols();
  if (n_components < 1 || n_components > m)
    throw Error(ErrorKind::PreconditionViolated, "fastica: n_components must be in 1..signals");
  if (n <= m) throw Error(ErrorKind::Underdetermined, "fastica: need more samples than signals");

  IcaResult out;
  out.mean = X.colwise().mean().transpose();
  const Matrix Xc = X.rowwise() - out.mean.transpose();
  const Matrix cov = (Xc.transpose() * Xc) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  const Vector evals = es.eigenvalues();  // ascending
  const double top = evals[m - 1];
  const Eigen::Index c = n_components;
  Matrix K(c, m);
  for (Eigen::Index i = 0; i < c; ++i) {
    const double lambda = evals[m - 1 - i];
    if (!(lambda > 1e-12 * std::max(top, 1e-300)))
      throw Error(ErrorKind::DegenerateInput, "fastica: covariance is singular");
    K.row(i) = es.eigenvectors().col(m - 1 - i).transpose() / std::sqrt(lambda);
  }
  const Matrix Z = Xc * K.transpose();  // n x c, identity covariance

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix W(c, c);
  for (Eigen::Index i = 0; i < c; ++i)
    for (Eigen::Index j = 0; j < c; ++j) W(i, j) = normal(rng);
  W = symmetric_decorrelation(W);

  Matrix best = W;
  double best_change = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    const Matrix Y = Z * W.transpose();
    const Matrix G = Y.array().tanh().matrix();
    const Vector g_prime_mean = (1.0 - G.array().square()).colwise().mean().transpose();
    Matrix W_next = (G.transpose() * Z) / static_cast<double>(n) - g_prime_mean.asDiagonal() * W;
    W_next = symmetric_decorrelation(W_next);
    const double change = ((W_next * W.transpose()).diagonal().array().abs() - 1.0).abs().maxCoeff();
    W = W_next;
    out.iterations = it + 1;
    if (change < best_change) {
      best_change = change;
      best = W;
    }
    if (change < tol) {
      out.converged = true;
      break;
    }
  }
  if (!out.converged) {
    W = best;
    out.warnings.push_back("NotConverged: FastICA reached max_iter=" + std::to_string(max_iter) +
                           "; returning best iterate (change " + std::to_string(best_change) + ")");
  }

  out.unmixing = W * K;
  out.sources = Z * W.transpose();
  out.mixing = out.unmixing.completeOrthogonalDecomposition().pseudoInverse();
  return out;
}

}  // namespace causalcast::numerics
