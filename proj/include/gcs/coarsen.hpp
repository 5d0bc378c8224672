#pragma once

#include <cstdint>
#include <string>

#include "gcs/graph.hpp"
#include "gcs/partition.hpp"

namespace gcs {

enum class CoarsenMethod {
  kSpectral,
  kVariationNeighborhoods,
  kVariationEdges,
  kHeavyEdge,
  kIdentity,
};

CoarsenMethod coarsen_method_from_string(const std::string& name);
std::string to_string(CoarsenMethod m);

struct CoarsenConfig {
  CoarsenMethod method = CoarsenMethod::kVariationNeighborhoods;
  double ratio = 0.5;          // fraction of nodes kept, in (0, 1]
  std::size_t k_eig = 10;      // eigenvector count for spectral/variation scoring
  std::uint64_t seed = 0;
  std::size_t max_levels = 20;

  void validate() const;
};

struct KMeansResult {
  std::vector<std::size_t> assignment;
  double cost = 0.0;
  std::vector<double> cost_trace;  // per-iteration, non-increasing
};

// Lloyd iterations with farthest-point seeding. Empty clusters are repaired
// by stealing the point farthest from its centroid.
KMeansResult lloyd_kmeans(const DenseMatrix& points, std::size_t k, std::uint64_t seed,
                          std::size_t max_iters = 100, double tol = 1e-10);

// k-means on the rows of the smallest-k eigenvectors of the normalized
// Laplacian, with a connectivity repair pass so every cluster induces a
// connected subgraph.
Partition spectral_clustering_partition(const Graph& g, std::size_t k, std::uint64_t seed);

enum class VariationCandidates { kNeighborhoods, kEdges };

// Multi-level local-variation contraction (connected input required).
Partition variation_coarsen(const Graph& g, VariationCandidates candidates, double ratio,
                            std::size_t k_eig, std::uint64_t seed,
                            std::size_t max_levels = 20);

// Repeated heaviest-edge matching (weight normalized by min endpoint degree).
Partition heavy_edge_coarsen(const Graph& g, double ratio, std::uint64_t seed);

// Dispatcher: per connected component; components with <= 10 nodes are kept
// uncoarsened. ratio = 1 returns the identity partition.
Partition coarsen(const Graph& g, const CoarsenConfig& cfg);

}  // namespace gcs
