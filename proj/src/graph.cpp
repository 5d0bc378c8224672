#include "gcs/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace gcs {

Graph Graph::from_edges(std::size_t n,
                        const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges,
                        BuildStats* stats) {
  std::map<std::pair<std::size_t, std::size_t>, double> acc;
  BuildStats local;
  for (const auto& [u, v, w] : edges) {
    if (u >= n || v >= n) throw std::out_of_range("Graph::from_edges: node index out of range");
    if (w < 0.0) throw std::invalid_argument("Graph::from_edges: negative edge weight");
    if (u == v) {
      ++local.self_loops_dropped;
      continue;
    }
    auto key = std::minmax(u, v);
    auto [it, inserted] = acc.emplace(key, w);
    if (!inserted) {
      it->second += w;
      ++local.duplicate_edges;
    }
  }
  std::vector<std::tuple<std::size_t, std::size_t, double>> triplets;
  triplets.reserve(acc.size() * 2);
  for (const auto& [key, w] : acc) {
    triplets.emplace_back(key.first, key.second, w);
    triplets.emplace_back(key.second, key.first, w);
  }
  Graph g;
  g.adj_ = SparseMatrix::from_triplets(n, std::move(triplets));
  g.degrees_.resize(n);
  for (std::size_t v = 0; v < n; ++v) g.degrees_[v] = g.adj_.row_sum(v);
  if (stats != nullptr) *stats = local;
  return g;
}

double Graph::total_weight() const {
  double s = 0.0;
  for (double w : adj_.val()) s += w;
  return s;
}

SparseMatrix laplacian(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<std::tuple<std::size_t, std::size_t, double>> triplets;
  triplets.reserve(g.adjacency().nnz() + n);
  for (std::size_t i = 0; i < n; ++i) {
    triplets.emplace_back(i, i, g.degree(i));
    for (std::size_t p = g.neighbor_begin(i); p < g.neighbor_end(i); ++p) {
      triplets.emplace_back(i, g.neighbor(p), -g.weight(p));
    }
  }
  return SparseMatrix::from_triplets(n, std::move(triplets));
}

SparseMatrix normalized_laplacian(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<double> dinv(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    dinv[i] = g.degree(i) > 0.0 ? 1.0 / std::sqrt(g.degree(i)) : 0.0;
  }
  std::vector<std::tuple<std::size_t, std::size_t, double>> triplets;
  triplets.reserve(g.adjacency().nnz() + n);
  for (std::size_t i = 0; i < n; ++i) {
    triplets.emplace_back(i, i, 1.0);
    for (std::size_t p = g.neighbor_begin(i); p < g.neighbor_end(i); ++p) {
      triplets.emplace_back(i, g.neighbor(p), -g.weight(p) * dinv[i] * dinv[g.neighbor(p)]);
    }
  }
  return SparseMatrix::from_triplets(n, std::move(triplets));
}

SparseMatrix normalized_adjacency_selfloops(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<double> dinv(n);
  for (std::size_t i = 0; i < n; ++i) dinv[i] = 1.0 / std::sqrt(g.degree(i) + 1.0);
  std::vector<std::tuple<std::size_t, std::size_t, double>> triplets;
  triplets.reserve(g.adjacency().nnz() + n);
  for (std::size_t i = 0; i < n; ++i) {
    triplets.emplace_back(i, i, dinv[i] * dinv[i]);
    for (std::size_t p = g.neighbor_begin(i); p < g.neighbor_end(i); ++p) {
      triplets.emplace_back(i, g.neighbor(p), g.weight(p) * dinv[i] * dinv[g.neighbor(p)]);
    }
  }
  return SparseMatrix::from_triplets(n, std::move(triplets));
}

double laplacian_quadratic(const SparseMatrix& l, const DenseMatrix& x) {
  if (l.size() != x.rows()) throw std::invalid_argument("laplacian_quadratic: dimension mismatch");
  const DenseMatrix lx = l.multiply(x);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x.data()[i] * lx.data()[i];
  return s;
}

std::vector<std::size_t> connected_components(const Graph& g) {
  const std::size_t n = g.num_nodes();
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> label(n, kUnset);
  std::vector<std::size_t> stack;
  std::size_t next = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (label[s] != kUnset) continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t p = g.neighbor_begin(v); p < g.neighbor_end(v); ++p) {
        const std::size_t u = g.neighbor(p);
        if (label[u] == kUnset) {
          label[u] = next;
          stack.push_back(u);
        }
      }
    }
    ++next;
  }
  return label;
}

Graph induced_subgraph(const Graph& g, const std::vector<std::size_t>& keep) {
  std::vector<std::size_t> pos(g.num_nodes(), static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < keep.size(); ++i) pos[keep[i]] = i;
  std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const std::size_t v = keep[i];
    for (std::size_t p = g.neighbor_begin(v); p < g.neighbor_end(v); ++p) {
      const std::size_t u = g.neighbor(p);
      if (u > v && pos[u] != static_cast<std::size_t>(-1)) {
        edges.emplace_back(i, pos[u], g.weight(p));
      }
    }
  }
  return Graph::from_edges(keep.size(), edges);
}

GraphBundle sbm_generate(const std::vector<std::size_t>& block_sizes, double intra_prob,
                         double inter_prob, std::size_t feature_dim, std::uint64_t seed) {
  if (intra_prob < 0.0 || intra_prob > 1.0 || inter_prob < 0.0 || inter_prob > 1.0) {
    throw std::invalid_argument("sbm_generate: probability outside [0,1]");
  }
  std::size_t n = 0;
  for (std::size_t s : block_sizes) n += s;
  std::vector<int> block(n);
  {
    std::size_t v = 0;
    for (std::size_t b = 0; b < block_sizes.size(); ++b) {
      for (std::size_t i = 0; i < block_sizes[b]; ++i) block[v++] = static_cast<int>(b);
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const double p = block[u] == block[v] ? intra_prob : inter_prob;
      if (unif(rng) < p) edges.emplace_back(u, v, 1.0);
    }
  }
  GraphBundle bundle;
  bundle.graph = Graph::from_edges(n, edges);
  // Block-separated Gaussian features: mean 3 on the block's coordinate.
  std::normal_distribution<double> noise(0.0, 1.0);
  bundle.features = DenseMatrix(n, feature_dim);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t j = 0; j < feature_dim; ++j) {
      double mean = (j % block_sizes.size()) == static_cast<std::size_t>(block[v]) ? 3.0 : 0.0;
      bundle.features(v, j) = mean + noise(rng);
    }
  }
  bundle.split.labels = block;
  bundle.split.num_classes = block_sizes.size();
  return bundle;
}

}  // namespace gcs
