#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gcs/dense.hpp"
#include "gcs/sparse.hpp"

namespace gcs {

// Undirected weighted graph. The adjacency is stored symmetrically in
// compressed row form; no self-loops live in the base adjacency (the
// self-loop augmented matrices are derived on demand).
class Graph {
 public:
  Graph() = default;

  struct BuildStats {
    std::size_t duplicate_edges = 0;  // collapsed with weights summed
    std::size_t self_loops_dropped = 0;
  };

  // Edges are (u, v, w) with u != v listed once per undirected edge;
  // both directions are stored. Duplicates are summed.
  static Graph from_edges(std::size_t n,
                          const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges,
                          BuildStats* stats = nullptr);

  std::size_t num_nodes() const { return adj_.size(); }
  // Number of undirected edges (stored pair count / 2).
  std::size_t num_edges() const { return adj_.nnz() / 2; }

  const SparseMatrix& adjacency() const { return adj_; }
  double degree(std::size_t v) const { return degrees_[v]; }
  const std::vector<double>& degrees() const { return degrees_; }
  double total_weight() const;  // sum of all adjacency entries (= 2m for unit weights)

  // Neighbors of v as (node, weight) spans into the CSR arrays.
  std::size_t neighbor_begin(std::size_t v) const { return adj_.row_ptr()[v]; }
  std::size_t neighbor_end(std::size_t v) const { return adj_.row_ptr()[v + 1]; }
  std::size_t neighbor(std::size_t p) const { return adj_.col()[p]; }
  double weight(std::size_t p) const { return adj_.val()[p]; }

 private:
  SparseMatrix adj_;
  std::vector<double> degrees_;
};

struct LabelledSplit {
  std::vector<int> labels;  // class index per node, -1 for unlabeled
  std::size_t num_classes = 0;
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

// L = D - A, symmetric PSD with zero row sums.
SparseMatrix laplacian(const Graph& g);

// N = I - D^{-1/2} A D^{-1/2}; isolated nodes contribute a unit diagonal.
SparseMatrix normalized_laplacian(const Graph& g);

// A_hat = (D+I)^{-1/2} (A+I) (D+I)^{-1/2}; eigenvalues in [-1, 1].
SparseMatrix normalized_adjacency_selfloops(const Graph& g);

// Tr(X^T L X) = sum over edges of squared feature differences.
double laplacian_quadratic(const SparseMatrix& l, const DenseMatrix& x);

// Component label per node; labels are 0..c-1 in order of first node.
std::vector<std::size_t> connected_components(const Graph& g);

// Subgraph induced by `keep` (indices into g, ascending); node i of the
// result corresponds to keep[i].
Graph induced_subgraph(const Graph& g, const std::vector<std::size_t>& keep);

struct GraphBundle {
  Graph graph;
  DenseMatrix features;
  LabelledSplit split;
};

// Stochastic block model fixture: Gaussian per-block features, block labels.
// Identical output for identical seed. Splits are left empty.
GraphBundle sbm_generate(const std::vector<std::size_t>& block_sizes, double intra_prob,
                         double inter_prob, std::size_t feature_dim, std::uint64_t seed);

}  // namespace gcs
