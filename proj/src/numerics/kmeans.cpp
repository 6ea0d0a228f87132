#include "causalcast/error.hpp"
#include "causalcast/numerics.hpp"

#include <limits>
#include <random>

namespace causalcast::numerics {

namespace {

Matrix plus_plus_seeds(const Matrix& points, int k, std::mt19937_64& rng) {
  const Eigen::Index n = points.rows();
  Matrix centroids(k, points.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centroids.row(0) = points.row(first(rng));
  Vector dist2(n);
  for (Eigen::Index i = 0; i < n; ++i) dist2[i] = (points.row(i) - centroids.row(0)).squaredNorm();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    const double total = dist2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double u = unit(rng) * total;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        u -= dist2[i];
        if (u < 0.0 && dist2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = c % n;
    }
    centroids.row(c) = points.row(pick);
    for (Eigen::Index i = 0; i < n; ++i)
      dist2[i] = std::min(dist2[i], (points.row(i) - centroids.row(c)).squaredNorm());
  }
  return centroids;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iter) {
  const Eigen::Index n = points.rows();
  if (k < 1 || k > n) throw Error(ErrorKind::BadK, "k=" + std::to_string(k) + " for " + std::to_string(n) + " points");
  std::mt19937_64 rng(seed);
  KMeansResult out;
  out.centroids = plus_plus_seeds(points, k, rng);
  out.assignments.assign(static_cast<std::size_t>(n), -1);

  for (int it = 0; it < max_iter; ++it) {
    std::vector<int> next(static_cast<std::size_t>(n));
    Vector cost(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int c = 0; c < k; ++c) {
        const double d2 = (points.row(i) - out.centroids.row(c)).squaredNorm();
        if (d2 < best) {
          best = d2;
          arg = c;
        }
      }
      next[static_cast<std::size_t>(i)] = arg;
      cost[i] = best;
    }

    // Repair empty clusters with the point farthest from its centroid.
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int a : next) ++counts[static_cast<std::size_t>(a)];
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (counts[static_cast<std::size_t>(next[static_cast<std::size_t>(i)])] < 2) continue;
        if (far < 0 || cost[i] > cost[far]) far = i;
      }
      if (far < 0) break;
      --counts[static_cast<std::size_t>(next[static_cast<std::size_t>(far)])];
      next[static_cast<std::size_t>(far)] = c;
      counts[static_cast<std::size_t>(c)] = 1;
      cost[far] = 0.0;
    }

    out.centroids.setZero();
    for (Eigen::Index i = 0; i < n; ++i) out.centroids.row(next[static_cast<std::size_t>(i)]) += points.row(i);
    for (int c = 0; c < k; ++c) out.centroids.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);

    double objective = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      objective += (points.row(i) - out.centroids.row(next[static_cast<std::size_t>(i)])).squaredNorm();
    out.objective.push_back(objective);
    out.iterations = it + 1;

    const bool stable = next == out.assignments;
    out.assignments = std::move(next);
    if (stable) break;
  }
  return out;
}

}  // namespace causalcast::numerics
