#pragma once

#include <cstddef>
#include <vector>

#include "gcs/graph.hpp"

namespace gcs {

// Surjective node -> cluster map. Induces the 0/1 incidence matrix P_hat and
// the column-orthonormal P = P_hat C^{-1/2} with C = diag(cluster sizes).
class Partition {
 public:
  Partition() = default;

  // Relabels values to a compact 0..k-1 range (ascending by original value).
  static Partition from_assignment(std::vector<std::size_t> assignment);

  std::size_t num_nodes() const { return assignment_.size(); }
  std::size_t num_clusters() const { return sizes_.size(); }
  std::size_t cluster_of(std::size_t v) const { return assignment_[v]; }
  std::size_t cluster_size(std::size_t j) const { return sizes_[j]; }
  const std::vector<std::size_t>& assignment() const { return assignment_; }
  const std::vector<std::size_t>& sizes() const { return sizes_; }
  // Members of each cluster, ascending.
  const std::vector<std::vector<std::size_t>>& members() const { return members_; }

  static Partition identity(std::size_t n);
  bool is_identity() const { return num_clusters() == num_nodes(); }

 private:
  std::vector<std::size_t> assignment_;
  std::vector<std::size_t> sizes_;
  std::vector<std::vector<std::size_t>> members_;
};

// P as an explicit sparse n x k matrix (one entry 1/sqrt(c_j) per row).
// Mostly for oracles; the aggregation operators below avoid materializing it.
DenseMatrix normalized_matrix(const Partition& p);

struct CoarseGraph {
  // W = P_hat^T A P_hat, including diagonal mass from intra-cluster edges.
  SparseMatrix weights;
  std::vector<std::size_t> sizes;          // diag(C)
  std::vector<double> coarse_degrees;      // diag(D_Phat) = full row sums of W
  SparseMatrix prop;                       // (D_Phat+C)^{-1/2} (W+C) (D_Phat+C)^{-1/2}

  std::size_t num_nodes() const { return weights.size(); }
  // Off-diagonal super-edges (undirected count).
  std::size_t num_edges() const;
};

CoarseGraph coarse_graph(const Graph& g, const Partition& p);
// Nesting: aggregate an already-coarse graph one more level.
CoarseGraph coarse_graph(const CoarseGraph& cg, const Partition& outer);

enum class FeatureMode { kNormalized, kMean };

// Normalized: row j = sum over cluster / sqrt(c_j) (X' = P^T X).
// Mean: divide by c_j instead.
DenseMatrix coarse_features(const DenseMatrix& x, const Partition& p, FeatureMode mode);

// Row v of result = M[cluster(v)] / sqrt(c_cluster(v)), i.e. P * M.
DenseMatrix lift_rows(const Partition& p, const DenseMatrix& m);

enum class LabelPolicy { kDiscardMixed, kArgmax };

struct CoarseLabels {
  std::vector<int> train_labels;  // -1 when discarded / absent
  std::vector<int> val_labels;
  std::vector<std::size_t> train_mask;
  std::vector<std::size_t> val_mask;
};

// Train and val are aggregated independently from their own members.
// Super-nodes mixing train and val members are dropped from both masks.
CoarseLabels coarse_labels(const LabelledSplit& split, const Partition& p, LabelPolicy policy);

// assignment(v) = outer(inner(v)).
Partition compose(const Partition& outer, const Partition& inner);

}  // namespace gcs
