#include "gcs/coarsen.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace gcs {
namespace {

double sqdist(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

}  // namespace

KMeansResult lloyd_kmeans(const DenseMatrix& points, std::size_t k, std::uint64_t seed,
                          std::size_t max_iters, double tol) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  if (k == 0 || k > n) throw std::invalid_argument("lloyd_kmeans: k must be in [1, n]");

  // Farthest-point seeding: random first center, then max-min distance,
  // ties to the lowest index.
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> centers;
  centers.push_back(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
  std::vector<double> min_dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    min_dist[i] = sqdist(points.row(i), points.row(centers[0]), d);
  }
  while (centers.size() < k) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (min_dist[i] > min_dist[best]) best = i;
    }
    centers.push_back(best);
    for (std::size_t i = 0; i < n; ++i) {
      min_dist[i] = std::min(min_dist[i], sqdist(points.row(i), points.row(best), d));
    }
  }

  DenseMatrix centroids(k, d);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t c = 0; c < d; ++c) centroids(j, c) = points(centers[j], c);
  }

  KMeansResult result;
  result.assignment.assign(n, 0);
  std::vector<std::size_t> counts(k, 0);
  double prev_cost = std::numeric_limits<double>::infinity();

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    // Assign.
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = sqdist(points.row(i), centroids.row(0), d);
      for (std::size_t j = 1; j < k; ++j) {
        const double dist = sqdist(points.row(i), centroids.row(j), d);
        if (dist < best_d) {
          best_d = dist;
          best = j;
        }
      }
      result.assignment[i] = best;
      cost += best_d;
    }

    // Empty-cluster repair: steal the point farthest from its centroid.
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) ++counts[result.assignment[i]];
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] > 0) continue;
      std::size_t worst = 0;
      double worst_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[result.assignment[i]] <= 1) continue;
        const double dist = sqdist(points.row(i), centroids.row(result.assignment[i]), d);
        if (dist > worst_d) {
          worst_d = dist;
          worst = i;
        }
      }
      cost -= worst_d;
      --counts[result.assignment[worst]];
      result.assignment[worst] = j;
      ++counts[j];
    }

    result.cost_trace.push_back(cost);
    result.cost = cost;
    if (prev_cost - cost < tol) break;
    prev_cost = cost;

    // Update centroids.
    centroids.set_zero();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < d; ++c) centroids(result.assignment[i], c) += points(i, c);
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] == 0) continue;
      for (std::size_t c = 0; c < d; ++c) centroids(j, c) /= static_cast<double>(counts[j]);
    }
  }

  // Recompute the final cost against the final assignment's centroids so the
  // reported value matches the returned clustering exactly.
  centroids.set_zero();
  std::fill(counts.begin(), counts.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    ++counts[result.assignment[i]];
    for (std::size_t c = 0; c < d; ++c) centroids(result.assignment[i], c) += points(i, c);
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] == 0) continue;
    for (std::size_t c = 0; c < d; ++c) centroids(j, c) /= static_cast<double>(counts[j]);
  }
  double final_cost = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    final_cost += sqdist(points.row(i), centroids.row(result.assignment[i]), d);
  }
  result.cost = final_cost;
  return result;
}

}  // namespace gcs
