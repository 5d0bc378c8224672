#include <doctest.h>

#include <cmath>

#include "gcs/partition.hpp"
#include "test_util.hpp"

using namespace gcs;

TEST_CASE("normalized partition matrix has orthonormal columns") {
  const Partition p = Partition::from_assignment(test::random_assignment(30, 7, 3));
  const DenseMatrix pm = normalized_matrix(p);
  const DenseMatrix gram = matmul_tn(pm, pm);
  CHECK(max_abs_diff(gram, DenseMatrix::identity(7)) < 1e-12);
}

TEST_CASE("4-cycle coarse weights count ordered node pairs") {
  const Graph g = Graph::from_edges(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 0, 1.0}});
  const Partition p = Partition::from_assignment({0, 0, 1, 1});
  const CoarseGraph cg = coarse_graph(g, p);
  // W_ij = sum over ordered pairs (u in C_i, v in C_j) of A_uv.
  CHECK(cg.weights.coeff(0, 0) == 2.0);
  CHECK(cg.weights.coeff(1, 1) == 2.0);
  CHECK(cg.weights.coeff(0, 1) == 2.0);
  CHECK(cg.weights.coeff(1, 0) == 2.0);
}

TEST_CASE("coarse weights conserve total adjacency mass") {
  const Graph g = test::random_graph(40, 0.2, 17);
  const Partition p = Partition::from_assignment(test::random_assignment(40, 8, 21));
  const CoarseGraph cg = coarse_graph(g, p);
  double sum_w = 0.0;
  for (double v : cg.weights.val()) sum_w += v;
  CHECK(sum_w == g.total_weight());  // integer weights: exact
}

TEST_CASE("coarse features match a per-cluster summation oracle") {
  const Partition p = Partition::from_assignment(test::random_assignment(25, 6, 9));
  const DenseMatrix x = gaussian_matrix(25, 4, 13);
  const DenseMatrix normalized = coarse_features(x, p, FeatureMode::kNormalized);
  const DenseMatrix mean = coarse_features(x, p, FeatureMode::kMean);
  for (std::size_t j = 0; j < p.num_clusters(); ++j) {
    for (std::size_t c = 0; c < 4; ++c) {
      double sum = 0.0;
      for (std::size_t m : p.members()[j]) sum += x(m, c);
      const double size = static_cast<double>(p.cluster_size(j));
      CHECK(normalized(j, c) == doctest::Approx(sum / std::sqrt(size)).epsilon(1e-12));
      CHECK(mean(j, c) == doctest::Approx(sum / size).epsilon(1e-12));
    }
  }
}

TEST_CASE("lift_rows equals the explicit P * M product") {
  const Partition p = Partition::from_assignment(test::random_assignment(18, 5, 4));
  const DenseMatrix m = gaussian_matrix(5, 3, 6);
  CHECK(max_abs_diff(lift_rows(p, m), matmul(normalized_matrix(p), m)) < 1e-13);
}

TEST_CASE("projection through the partition is idempotent") {
  const Partition p = Partition::from_assignment(test::random_assignment(20, 6, 8));
  const DenseMatrix x = gaussian_matrix(20, 2, 10);
  const DenseMatrix once = lift_rows(p, coarse_features(x, p, FeatureMode::kNormalized));
  const DenseMatrix twice = lift_rows(p, coarse_features(once, p, FeatureMode::kNormalized));
  CHECK(max_abs_diff(once, twice) < 1e-12);
}

TEST_CASE("mixed-label clusters follow the configured policy") {
  LabelledSplit split;
  split.labels = {1, 2, 1};
  split.num_classes = 3;
  split.train = {0, 1, 2};
  const Partition p = Partition::from_assignment({0, 0, 1});

  const CoarseLabels discard = coarse_labels(split, p, LabelPolicy::kDiscardMixed);
  CHECK(discard.train_labels[0] == -1);
  CHECK(discard.train_mask == std::vector<std::size_t>{1});

  // Counts tie (one each of class 1 and 2): argmax breaks to the lowest index.
  const CoarseLabels argmax = coarse_labels(split, p, LabelPolicy::kArgmax);
  CHECK(argmax.train_labels[0] == 1);
  CHECK(argmax.train_mask == std::vector<std::size_t>{0, 1});
}

TEST_CASE("clusters mixing train and val members are dropped from both masks") {
  LabelledSplit split;
  split.labels = {1, 1, 2};
  split.num_classes = 3;
  split.train = {0};
  split.val = {1, 2};
  const Partition p = Partition::from_assignment({0, 0, 1});
  const CoarseLabels out = coarse_labels(split, p, LabelPolicy::kArgmax);
  CHECK(out.train_mask.empty());
  CHECK(out.val_mask == std::vector<std::size_t>{1});
  CHECK(out.train_labels[0] == -1);
  CHECK(out.val_labels[0] == -1);
}

TEST_CASE("single super-node of the one-edge graph propagates as [1]") {
  const Graph g = Graph::from_edges(2, {{0, 1, 1.0}});
  const Partition p = Partition::from_assignment({0, 0});
  const CoarseGraph cg = coarse_graph(g, p);
  // A_Phat = 2, D_Phat = 2, C = 2: (2+2)/(2+2) = 1.
  CHECK(cg.prop.size() == 1);
  CHECK(cg.prop.coeff(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("coarse propagation matches the dense formula") {
  const Graph g = test::random_graph(22, 0.3, 5);
  const Partition p = Partition::from_assignment(test::random_assignment(22, 6, 7));
  const CoarseGraph cg = coarse_graph(g, p);

  // Dense oracle: P_hat^T (A + I) P_hat scaled by (D_Phat + C)^{-1/2}.
  const std::size_t n = 22, k = 6;
  DenseMatrix phat(n, k);
  for (std::size_t v = 0; v < n; ++v) phat(v, p.cluster_of(v)) = 1.0;
  DenseMatrix a_tilde = g.adjacency().to_dense();
  for (std::size_t i = 0; i < n; ++i) a_tilde(i, i) += 1.0;
  const DenseMatrix w_tilde = matmul_tn(phat, matmul(a_tilde, phat));
  DenseMatrix want(k, k);
  std::vector<double> scale(k);
  for (std::size_t j = 0; j < k; ++j) {
    double d = 0.0;
    for (std::size_t v : p.members()[j]) d += g.degree(v);
    scale[j] = 1.0 / std::sqrt(d + static_cast<double>(p.cluster_size(j)));
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) want(i, j) = scale[i] * w_tilde(i, j) * scale[j];
  }
  CHECK(max_abs_diff(cg.prop.to_dense(), want) < 1e-10);
}

TEST_CASE("three-level composition matches one-shot aggregation") {
  const Graph g = test::random_graph(24, 0.25, 31);
  const Partition level1 = Partition::from_assignment(test::random_assignment(24, 12, 1));
  const Partition level2 = Partition::from_assignment(test::random_assignment(12, 6, 2));
  const Partition level3 = Partition::from_assignment(test::random_assignment(6, 3, 3));

  const CoarseGraph nested =
      coarse_graph(coarse_graph(coarse_graph(g, level1), level2), level3);
  const Partition total = compose(level3, compose(level2, level1));
  const CoarseGraph direct = coarse_graph(g, total);
  CHECK(max_abs_diff(nested.weights.to_dense(), direct.weights.to_dense()) < 1e-12);
  CHECK(max_abs_diff(nested.prop.to_dense(), direct.prop.to_dense()) < 1e-12);
}

TEST_CASE("from_assignment compacts labels in ascending order") {
  const Partition p = Partition::from_assignment({5, 2, 5, 9});
  CHECK(p.num_clusters() == 3);
  CHECK(p.cluster_of(1) == 0);  // original label 2
  CHECK(p.cluster_of(0) == 1);
  CHECK(p.cluster_of(3) == 2);
  CHECK(p.members()[1] == std::vector<std::size_t>{0, 2});
}
