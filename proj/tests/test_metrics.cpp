#include <doctest.h>

#include <cmath>
#include <random>

#include "gcs/coarsen.hpp"
#include "gcs/eigensolve.hpp"
#include "gcs/metrics.hpp"
#include "gcs/nn.hpp"
#include "test_util.hpp"

using namespace gcs;

TEST_CASE("nuclear error equals the k-means cost on the partition") {
  const DenseMatrix v = random_orthonormal(12, 3, 5);
  const Partition p = Partition::from_assignment(test::random_assignment(12, 4, 6));
  CHECK(std::fabs(nuclear_error(v, p) - kmeans_cost(v, p)) < 1e-10);
}

TEST_CASE("kmeans_cost hand oracle on two points") {
  DenseMatrix v(2, 1);
  v(0, 0) = 0.0;
  v(1, 0) = 2.0;
  const Partition p = Partition::from_assignment({0, 0});
  CHECK(kmeans_cost(v, p) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("nuclear error rejects a non-orthonormal basis") {
  DenseMatrix v = gaussian_matrix(8, 2, 3);
  const Partition p = Partition::from_assignment(test::random_assignment(8, 3, 4));
  CHECK_THROWS(nuclear_error(v, p));
  CHECK_THROWS(spectral_error(v, p));
}

TEST_CASE("spectral error matches a random-direction sampling oracle") {
  const DenseMatrix v = random_orthonormal(14, 4, 9);
  const Partition p = Partition::from_assignment(test::random_assignment(14, 5, 10));
  const double exact = spectral_error(v, p);

  const DenseMatrix pv = lift_rows(p, coarse_features(v, p, FeatureMode::kNormalized));
  std::mt19937_64 rng(11);
  std::normal_distribution<double> dist;
  double best = 0.0;
  for (int s = 0; s < 1000; ++s) {
    std::vector<double> x(4);
    double norm = 0.0;
    for (double& c : x) {
      c = dist(rng);
      norm += c * c;
    }
    norm = std::sqrt(norm);
    double loss = 0.0;
    for (std::size_t i = 0; i < 14; ++i) {
      double r = 0.0;
      for (std::size_t c = 0; c < 4; ++c) r += (v(i, c) - pv(i, c)) * x[c] / norm;
      loss += r * r;
    }
    best = std::max(best, loss);
  }
  CHECK(best <= exact + 1e-12);  // sampling can only lower-bound the max
  CHECK(best >= 0.98 * exact);
}

TEST_CASE("restricted L-error matches sampling over the deflated span") {
  const Graph g = test::random_graph(15, 0.35, 21);
  const SparseMatrix l = laplacian(g);
  // 4 smallest nontrivial eigenvectors of the Laplacian.
  const EigenPairs pairs = eigen_smallest_k(l, 5);
  DenseMatrix v(15, 4);
  for (std::size_t i = 0; i < 15; ++i) {
    for (std::size_t c = 0; c < 4; ++c) v(i, c) = pairs.vectors(i, c + 1);
  }
  const Partition p = Partition::from_assignment(test::random_assignment(15, 6, 22));
  const double eps = restricted_l_error(v, p, l);

  std::mt19937_64 rng(23);
  std::normal_distribution<double> dist;
  double best = 0.0;
  for (int s = 0; s < 2000; ++s) {
    DenseMatrix y(15, 1);
    std::vector<double> coeff(4);
    for (double& c : coeff) c = dist(rng);
    for (std::size_t i = 0; i < 15; ++i) {
      for (std::size_t c = 0; c < 4; ++c) y(i, 0) += v(i, c) * coeff[c];
    }
    DenseMatrix residual = sub(y, lift_rows(p, coarse_features(y, p, FeatureMode::kNormalized)));
    const double num = laplacian_quadratic(l, residual);
    const double den = laplacian_quadratic(l, y);
    if (den > 1e-12) best = std::max(best, std::sqrt(num / den));
  }
  CHECK(best <= eps + 1e-10);
  CHECK(best >= 0.98 * eps);
}

TEST_CASE("3-epsilon bound holds with no violations") {
  const GraphBundle bundle = sbm_generate({20, 20, 20}, 0.45, 0.03, 4, 31);
  const Graph& g = bundle.graph;
  const SparseMatrix l = laplacian(g);
  const EigenPairs pairs = eigen_smallest_k(l, 4);
  CoarsenConfig cfg;
  cfg.method = CoarsenMethod::kVariationNeighborhoods;
  cfg.ratio = 0.5;
  cfg.seed = 31;
  const Partition p = coarsen(g, cfg);
  const double eps = restricted_l_error(pairs.vectors, p, l);
  REQUIRE(eps < 1.0);
  CHECK(epsilon_similarity_check(l, p, pairs.vectors, 5000, 32) == 0);
}

TEST_CASE("appnp residual obeys the contraction rate") {
  const Graph g = test::random_graph(10, 0.4, 41);
  const SparseMatrix prop = normalized_adjacency_selfloops(g);
  const double beta = 0.2;
  const DenseMatrix h = gaussian_matrix(10, 3, 42);
  const DenseMatrix z_star = ppnp_exact(prop, h, beta);

  DenseMatrix z = h;
  for (int step = 0; step < 200; ++step) {
    DenseMatrix pz = prop.multiply(z);
    for (std::size_t i = 0; i < z.size(); ++i) {
      z.data()[i] = (1.0 - beta) * pz.data()[i] + beta * h.data()[i];
    }
  }
  const double start_gap = frobenius_norm(sub(h, z_star));
  const double rate_bound = std::pow(1.0 - beta, 200) * start_gap;
  CHECK(fixed_point_residual(prop, beta, h, z) <= rate_bound + 1e-6);
  CHECK(fixed_point_residual(prop, beta, h, z) < 1e-6);
  CHECK(fixed_point_residual(prop, beta, h, z_star) < 1e-10);
}

TEST_CASE("ppnp solution is stationary for the variational objective") {
  const Graph g = test::random_graph(12, 0.4, 51);
  const SparseMatrix prop = normalized_adjacency_selfloops(g);
  const double beta = 0.1;
  const DenseMatrix h = gaussian_matrix(12, 3, 52);
  const DenseMatrix z_star = ppnp_exact(prop, h, beta);

  // Y = D~^{-1/2} Z*.
  DenseMatrix y = z_star;
  for (std::size_t i = 0; i < 12; ++i) {
    const double d = std::sqrt(g.degree(i) + 1.0);
    for (std::size_t j = 0; j < 3; ++j) y(i, j) /= d;
  }
  // L here is the self-loop-augmented combinatorial Laplacian D~ - A~.
  std::vector<std::tuple<std::size_t, std::size_t, double>> trips;
  for (std::size_t i = 0; i < 12; ++i) {
    trips.emplace_back(i, i, g.degree(i) + 1.0 - 1.0);  // D~ - I from the loop
    for (std::size_t q = g.neighbor_begin(i); q < g.neighbor_end(i); ++q) {
      trips.emplace_back(i, g.neighbor(q), -g.weight(q));
    }
  }
  const SparseMatrix l_tilde = SparseMatrix::from_triplets(12, std::move(trips));
  CHECK(variational_stationarity(l_tilde, g.degrees(), beta, h, y) < 1e-7);
}

TEST_CASE("reduced coarse system agrees with its recurrence") {
  const Graph g = test::random_graph(16, 0.3, 61);
  const Partition p = Partition::from_assignment(test::random_assignment(16, 5, 62));
  const DenseMatrix f = gaussian_matrix(16, 3, 63);
  const ReducedSystemResult r = reduced_system_check(normalized_matrix(p), g, 0.1, f);
  CHECK(r.recurrence_vs_solve < 1e-6);
  CHECK(r.stationarity < 1e-7);

  // Dense orthonormal V works too.
  const ReducedSystemResult r2 = reduced_system_check(random_orthonormal(16, 4, 64), g, 0.1, f);
  CHECK(r2.recurrence_vs_solve < 1e-6);
  CHECK(r2.stationarity < 1e-7);
}

TEST_CASE("error_report enforces the nuclear/k-means identity") {
  const GraphBundle bundle = sbm_generate({15, 15}, 0.4, 0.05, 2, 71);
  const EigenPairs pairs = eigen_smallest_k(normalized_laplacian(bundle.graph), 4);
  const Partition p =
      Partition::from_assignment(test::random_assignment(bundle.graph.num_nodes(), 10, 72));
  const ErrorReport report = error_report(pairs.vectors, p, laplacian(bundle.graph), 500, 73);
  CHECK(std::fabs(report.nuclear_error - report.kmeans_cost) < 1e-8);
  CHECK(report.spectral_error <= report.nuclear_error + 1e-10);
  CHECK(report.spectral_error >= 0.0);
}

TEST_CASE("path-graph Laplacian eigenvalues are 0, 1, 3") {
  const Graph g = Graph::from_edges(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  const EigenPairs pairs = eigen_smallest_k(laplacian(g), 3);
  CHECK(pairs.values[0] == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(pairs.values[1] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(pairs.values[2] == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("lanczos matches the dense eigensolver on a random PSD matrix") {
  // Random sparse PSD: Laplacian of a weighted random graph plus a diagonal.
  const Graph g = test::random_graph(50, 0.15, 81);
  std::vector<std::tuple<std::size_t, std::size_t, double>> trips;
  const SparseMatrix l = laplacian(g);
  for (std::size_t i = 0; i < 50; ++i) {
    for (std::size_t q = l.row_ptr()[i]; q < l.row_ptr()[i + 1]; ++q) {
      trips.emplace_back(i, l.col()[q], l.val()[q]);
    }
    trips.emplace_back(i, i, 0.1 * static_cast<double>(i % 7));
  }
  const SparseMatrix s = SparseMatrix::from_triplets(50, std::move(trips));
  const EigenPairs dense = eigen_smallest_k(s, 6);
  const EigenPairs lanczos = eigen_smallest_k_lanczos(s, 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(std::fabs(dense.values[i] - lanczos.values[i]) < 1e-8);
  }
  // Eigenvectors agree up to sign.
  for (std::size_t c = 0; c < 6; ++c) {
    double dot = 0.0;
    for (std::size_t i = 0; i < 50; ++i) dot += dense.vectors(i, c) * lanczos.vectors(i, c);
    CHECK(std::fabs(std::fabs(dot) - 1.0) < 1e-6);
  }
}
