#include "gcs/coarsen.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <queue>
#include <stdexcept>

#include "gcs/eigensolve.hpp"

namespace gcs {

CoarsenMethod coarsen_method_from_string(const std::string& name) {
  if (name == "spectral") return CoarsenMethod::kSpectral;
  if (name == "variation_neighborhoods") return CoarsenMethod::kVariationNeighborhoods;
  if (name == "variation_edges") return CoarsenMethod::kVariationEdges;
  if (name == "heavy_edge") return CoarsenMethod::kHeavyEdge;
  if (name == "identity") return CoarsenMethod::kIdentity;
  throw std::invalid_argument("unknown coarsening method: " + name);
}

std::string to_string(CoarsenMethod m) {
  switch (m) {
    case CoarsenMethod::kSpectral: return "spectral";
    case CoarsenMethod::kVariationNeighborhoods: return "variation_neighborhoods";
    case CoarsenMethod::kVariationEdges: return "variation_edges";
    case CoarsenMethod::kHeavyEdge: return "heavy_edge";
    case CoarsenMethod::kIdentity: return "identity";
  }
  return "?";
}

void CoarsenConfig::validate() const {
  if (ratio <= 0.0 || ratio > 1.0) throw std::invalid_argument("ratio must be in (0, 1]");
  if (k_eig < 1) throw std::invalid_argument("k_eig must be >= 1");
  if (max_levels < 1) throw std::invalid_argument("max_levels must be >= 1");
}

namespace {

constexpr std::size_t kSmallComponent = 10;  // kept uncoarsened

std::size_t target_clusters(double ratio, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n)));
}

// Weighted graph view of a coarse level (self-loop mass dropped; it does not
// enter Laplacians or matchings).
Graph graph_from_coarse(const CoarseGraph& cg) {
  std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
  for (std::size_t i = 0; i < cg.weights.size(); ++i) {
    for (std::size_t p = cg.weights.row_ptr()[i]; p < cg.weights.row_ptr()[i + 1]; ++p) {
      const std::size_t j = cg.weights.col()[p];
      if (j > i) edges.emplace_back(i, j, cg.weights.val()[p]);
    }
  }
  return Graph::from_edges(cg.weights.size(), edges);
}

// ---------------------------------------------------------------------------
// Spectral clustering with connectivity repair
// ---------------------------------------------------------------------------

// Splits clusters that do not induce connected subgraphs, then merges the
// surplus pieces back into graph-adjacent clusters until k is restored.
Partition make_locality_preserving(const Graph& g, const std::vector<std::size_t>& raw,
                                   std::size_t k_target) {
  const std::size_t n = g.num_nodes();
  // Connected pieces within each raw cluster via BFS restricted to the cluster.
  std::vector<std::size_t> piece(n, static_cast<std::size_t>(-1));
  std::size_t next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (piece[s] != static_cast<std::size_t>(-1)) continue;
    piece[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t p = g.neighbor_begin(v); p < g.neighbor_end(v); ++p) {
        const std::size_t u = g.neighbor(p);
        if (raw[u] == raw[s] && piece[u] == static_cast<std::size_t>(-1)) {
          piece[u] = next;
          stack.push_back(u);
        }
      }
    }
    ++next;
  }

  // Merge smallest clusters into their most strongly connected neighbor
  // until we are back at the target count.
  std::vector<std::size_t> owner(next);  // union-find style flattened each pass
  for (std::size_t j = 0; j < next; ++j) owner[j] = j;
  auto find = [&](std::size_t j) {
    while (owner[j] != j) j = owner[j] = owner[owner[j]];
    return j;
  };

  std::size_t k_cur = next;
  while (k_cur > k_target) {
    std::vector<std::size_t> size(next, 0);
    for (std::size_t v = 0; v < n; ++v) ++size[find(piece[v])];
    // Smallest live cluster, ties to lowest id.
    std::size_t victim = static_cast<std::size_t>(-1);
    for (std::size_t j = 0; j < next; ++j) {
      if (find(j) != j || size[j] == 0) continue;
      if (victim == static_cast<std::size_t>(-1) || size[j] < size[victim]) victim = j;
    }
    // Strongest adjacent cluster.
    std::vector<double> link(next, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
      if (find(piece[v]) != victim) continue;
      for (std::size_t p = g.neighbor_begin(v); p < g.neighbor_end(v); ++p) {
        const std::size_t other = find(piece[g.neighbor(p)]);
        if (other != victim) link[other] += g.weight(p);
      }
    }
    std::size_t best = static_cast<std::size_t>(-1);
    for (std::size_t j = 0; j < next; ++j) {
      if (link[j] <= 0.0) continue;
      if (best == static_cast<std::size_t>(-1) || link[j] > link[best]) best = j;
    }
    if (best == static_cast<std::size_t>(-1)) break;  // isolated piece, keep as slack
    owner[victim] = best;
    --k_cur;
  }

  std::vector<std::size_t> assignment(n);
  for (std::size_t v = 0; v < n; ++v) assignment[v] = find(piece[v]);
  return Partition::from_assignment(std::move(assignment));
}

}  // namespace

Partition spectral_clustering_partition(const Graph& g, std::size_t k, std::uint64_t seed) {
  const std::size_t n = g.num_nodes();
  if (k > n) throw std::invalid_argument("spectral_clustering_partition: k > n");
  if (k == n) return Partition::identity(n);
  const EigenPairs pairs = eigen_smallest_k(normalized_laplacian(g), k);
  const KMeansResult km = lloyd_kmeans(pairs.vectors, k, seed);
  return make_locality_preserving(g, km.assignment, k);
}

// ---------------------------------------------------------------------------
// Local variation coarsening
// ---------------------------------------------------------------------------

namespace {

// cost(S) = || (I - Pi_S) V_S ||^2_{L_S} / (|S| - 1), where L_S is the
// Laplacian of the induced subgraph plus half the boundary weight on the
// diagonal, and Pi_S averages within S.
double variation_cost(const Graph& g, const DenseMatrix& v, const std::vector<std::size_t>& set) {
  const std::size_t s = set.size();
  const std::size_t k = v.cols();
  std::vector<std::size_t> pos(g.num_nodes(), static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < s; ++i) pos[set[i]] = i;

  // B = V_S - mean(V_S)
  DenseMatrix b(s, k);
  std::vector<double> mean(k, 0.0);
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t c = 0; c < k; ++c) mean[c] += v(set[i], c);
  }
  for (double& m : mean) m /= static_cast<double>(s);
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t c = 0; c < k; ++c) b(i, c) = v(set[i], c) - mean[c];
  }

  // Tr(B^T L_S B) accumulated edge-wise plus the boundary diagonal.
  double cost = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    const std::size_t u = set[i];
    double boundary = 0.0;
    for (std::size_t p = g.neighbor_begin(u); p < g.neighbor_end(u); ++p) {
      const std::size_t w = g.neighbor(p);
      if (pos[w] == static_cast<std::size_t>(-1)) {
        boundary += g.weight(p);
      } else if (w > u) {
        // internal edge: w * ||b_i - b_j||^2
        double acc = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
          const double t = b(i, c) - b(pos[w], c);
          acc += t * t;
        }
        cost += g.weight(p) * acc;
      }
    }
    if (boundary > 0.0) {
      double acc = 0.0;
      for (std::size_t c = 0; c < k; ++c) acc += b(i, c) * b(i, c);
      cost += 0.5 * boundary * acc;
    }
  }
  return cost / static_cast<double>(s - 1);
}

struct Candidate {
  double cost;
  std::size_t min_node;
  std::vector<std::size_t> set;
  bool operator>(const Candidate& other) const {
    if (cost != other.cost) return cost > other.cost;
    return min_node > other.min_node;
  }
};

// One greedy contraction pass. Returns the level partition (k == n when no
// candidate was accepted).
Partition variation_level(const Graph& g, const DenseMatrix& v, VariationCandidates kind,
                          std::size_t level_target) {
  const std::size_t n = g.num_nodes();
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<Candidate>> heap;

  if (kind == VariationCandidates::kNeighborhoods) {
    for (std::size_t u = 0; u < n; ++u) {
      std::vector<std::size_t> set{u};
      for (std::size_t p = g.neighbor_begin(u); p < g.neighbor_end(u); ++p) {
        set.push_back(g.neighbor(p));
      }
      std::sort(set.begin(), set.end());
      if (set.size() < 2) continue;
      heap.push({variation_cost(g, v, set), set.front(), std::move(set)});
    }
  } else {
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t p = g.neighbor_begin(u); p < g.neighbor_end(u); ++p) {
        const std::size_t w = g.neighbor(p);
        if (w <= u) continue;
        std::vector<std::size_t> set{u, w};
        heap.push({variation_cost(g, v, set), u, std::move(set)});
      }
    }
  }

  std::vector<bool> marked(n, false);
  std::vector<std::size_t> assignment(n, static_cast<std::size_t>(-1));
  std::size_t next_cluster = 0;
  std::size_t count = n;

  while (count > level_target && !heap.empty()) {
    Candidate cand = heap.top();
    heap.pop();
    std::vector<std::size_t> live;
    for (std::size_t u : cand.set) {
      if (!marked[u]) live.push_back(u);
    }
    if (live.size() < 2) continue;
    if (live.size() != cand.set.size()) {
      // Set shrank since scoring; rescore lazily and reinsert.
      heap.push({variation_cost(g, v, live), live.front(), std::move(live)});
      continue;
    }
    // Contracting |S| nodes into one may overshoot the target; trim the set
    // to a connected subset that fits and rescore it.
    const std::size_t allowed = count - level_target;
    if (live.size() - 1 > allowed) {
      std::vector<std::size_t> pos(n, static_cast<std::size_t>(-1));
      for (std::size_t i = 0; i < live.size(); ++i) pos[live[i]] = i;
      std::vector<std::size_t> trimmed{live.front()};
      std::vector<bool> taken(live.size(), false);
      taken[pos[live.front()]] = true;
      for (std::size_t qi = 0; qi < trimmed.size() && trimmed.size() < allowed + 1; ++qi) {
        const std::size_t u = trimmed[qi];
        for (std::size_t p = g.neighbor_begin(u);
             p < g.neighbor_end(u) && trimmed.size() < allowed + 1; ++p) {
          const std::size_t w = g.neighbor(p);
          if (pos[w] != static_cast<std::size_t>(-1) && !taken[pos[w]]) {
            taken[pos[w]] = true;
            trimmed.push_back(w);
          }
        }
      }
      if (trimmed.size() < 2) continue;
      std::sort(trimmed.begin(), trimmed.end());
      heap.push({variation_cost(g, v, trimmed), trimmed.front(), std::move(trimmed)});
      continue;
    }
    for (std::size_t u : live) {
      marked[u] = true;
      assignment[u] = next_cluster;
    }
    ++next_cluster;
    count -= live.size() - 1;
  }
  for (std::size_t u = 0; u < n; ++u) {
    if (!marked[u]) assignment[u] = next_cluster++;
  }
  return Partition::from_assignment(std::move(assignment));
}

}  // namespace

namespace {

// B <- B M^{-1/2} with M = B^T L B, dropping directions that collapsed to
// (numerical) rank deficiency during restriction.
DenseMatrix l_orthonormalize(const DenseMatrix& b, const SparseMatrix& l) {
  const std::size_t n = b.rows(), k = b.cols();
  const DenseMatrix lb = l.multiply(b);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t c = 0; c < k; ++c) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += b(i, a) * lb(i, c);
      m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c)) = dot;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const double top = es.eigenvalues()(static_cast<Eigen::Index>(k - 1));
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < k; ++c) {
    if (es.eigenvalues()(static_cast<Eigen::Index>(c)) > std::max(top, 1.0) * 1e-12) {
      keep.push_back(c);
    }
  }
  DenseMatrix out(n, keep.size());
  for (std::size_t j = 0; j < keep.size(); ++j) {
    const double scale = 1.0 / std::sqrt(es.eigenvalues()(static_cast<Eigen::Index>(keep[j])));
    for (std::size_t i = 0; i < n; ++i) {
      double x = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        x += b(i, c) * es.eigenvectors()(static_cast<Eigen::Index>(c),
                                         static_cast<Eigen::Index>(keep[j]));
      }
      out(i, j) = x * scale;
    }
  }
  return out;
}

}  // namespace

Partition variation_coarsen(const Graph& g, VariationCandidates candidates, double ratio,
                            std::size_t k_eig, std::uint64_t /*seed*/,
                            std::size_t max_levels) {
  const std::size_t n0 = g.num_nodes();
  const std::size_t target = target_clusters(ratio, n0);
  Partition total = Partition::identity(n0);
  if (target >= n0) return total;

  // Smooth basis of the original graph, L-orthonormalized. It is restricted
  // (cluster means) level by level rather than recomputed, so every level
  // keeps optimizing preservation of the original subspace.
  const std::size_t k = std::min(k_eig + 1, n0);  // +1 absorbs the nullspace
  EigenPairs pairs = eigen_smallest_k(laplacian(g), k);
  DenseMatrix basis(n0, k);
  for (std::size_t c = 0; c < k; ++c) {
    const bool null_dir = pairs.values[c] < 1e-10;
    const double scale = null_dir ? 1.0 : 1.0 / std::sqrt(pairs.values[c]);
    for (std::size_t i = 0; i < n0; ++i) basis(i, c) = pairs.vectors(i, c) * scale;
  }

  CoarseGraph level = coarse_graph(g, total);
  for (std::size_t l = 0; l < max_levels; ++l) {
    const std::size_t n_cur = level.num_nodes();
    if (n_cur <= target) break;
    const Graph cur = graph_from_coarse(level);
    // Contract at most half the nodes per level so scores stay fresh.
    const std::size_t level_target = std::max(target, n_cur - n_cur / 2);
    const Partition step = variation_level(cur, basis, candidates, level_target);
    if (step.num_clusters() == n_cur) break;  // no progress
    total = compose(step, total);
    level = coarse_graph(level, step);

    // Restrict the basis to the new level (cluster means), then restore
    // L-orthonormality against the new level's Laplacian.
    DenseMatrix restricted(step.num_clusters(), basis.cols());
    for (std::size_t j = 0; j < step.num_clusters(); ++j) {
      for (std::size_t c = 0; c < basis.cols(); ++c) {
        double sum = 0.0;
        for (std::size_t v : step.members()[j]) sum += basis(v, c);
        restricted(j, c) = sum / static_cast<double>(step.cluster_size(j));
      }
    }
    basis = l_orthonormalize(restricted, laplacian(graph_from_coarse(level)));
  }
  if (total.num_clusters() > target) {
    std::cerr << "[gcs] variation_coarsen: reached k=" << total.num_clusters()
              << " > target " << target << " within level budget; returning best effort\n";
  }
  return total;
}

// ---------------------------------------------------------------------------
// Heavy-edge matching
// ---------------------------------------------------------------------------

Partition heavy_edge_coarsen(const Graph& g, double ratio, std::uint64_t /*seed*/) {
  const std::size_t n0 = g.num_nodes();
  const std::size_t target = target_clusters(ratio, n0);
  Partition total = Partition::identity(n0);
  if (target >= n0) return total;

  CoarseGraph level = coarse_graph(g, total);
  while (level.num_nodes() > target) {
    const Graph cur = graph_from_coarse(level);
    const std::size_t n_cur = cur.num_nodes();

    struct ScoredEdge {
      double score;
      std::size_t u, v;
    };
    std::vector<ScoredEdge> edges;
    for (std::size_t u = 0; u < n_cur; ++u) {
      for (std::size_t p = cur.neighbor_begin(u); p < cur.neighbor_end(u); ++p) {
        const std::size_t v = cur.neighbor(p);
        if (v <= u) continue;
        const double norm = std::min(cur.degree(u), cur.degree(v));
        edges.push_back({cur.weight(p) / norm, u, v});
      }
    }
    if (edges.empty()) break;
    std::sort(edges.begin(), edges.end(), [](const ScoredEdge& a, const ScoredEdge& b) {
      if (a.score != b.score) return a.score > b.score;
      return std::tie(a.u, a.v) < std::tie(b.u, b.v);
    });

    std::vector<bool> matched(n_cur, false);
    std::vector<std::size_t> assignment(n_cur, static_cast<std::size_t>(-1));
    std::size_t next_cluster = 0;
    std::size_t count = n_cur;
    for (const ScoredEdge& e : edges) {
      if (count <= target) break;
      if (matched[e.u] || matched[e.v]) continue;
      matched[e.u] = matched[e.v] = true;
      assignment[e.u] = assignment[e.v] = next_cluster++;
      --count;
    }
    if (next_cluster == 0) break;
    for (std::size_t u = 0; u < n_cur; ++u) {
      if (!matched[u]) assignment[u] = next_cluster++;
    }
    const Partition step = Partition::from_assignment(std::move(assignment));
    total = compose(step, total);
    level = coarse_graph(level, step);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Dispatcher
// ---------------------------------------------------------------------------

Partition coarsen(const Graph& g, const CoarsenConfig& cfg) {
  cfg.validate();
  const std::size_t n = g.num_nodes();
  if (cfg.ratio >= 1.0 || cfg.method == CoarsenMethod::kIdentity) {
    return Partition::identity(n);
  }

  const std::vector<std::size_t> comp = connected_components(g);
  const std::size_t num_comp = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
  std::vector<std::vector<std::size_t>> nodes_of(num_comp);
  for (std::size_t v = 0; v < n; ++v) nodes_of[comp[v]].push_back(v);

  std::vector<std::size_t> assignment(n);
  std::size_t offset = 0;
  for (std::size_t c = 0; c < num_comp; ++c) {
    const auto& nodes = nodes_of[c];
    if (nodes.size() <= kSmallComponent) {
      for (std::size_t v : nodes) assignment[v] = offset++;
      continue;
    }
    const Graph sub = induced_subgraph(g, nodes);
    Partition p;
    switch (cfg.method) {
      case CoarsenMethod::kSpectral:
        p = spectral_clustering_partition(sub, target_clusters(cfg.ratio, nodes.size()), cfg.seed);
        break;
      case CoarsenMethod::kVariationNeighborhoods:
        p = variation_coarsen(sub, VariationCandidates::kNeighborhoods, cfg.ratio,
                              std::min(cfg.k_eig, nodes.size()), cfg.seed, cfg.max_levels);
        break;
      case CoarsenMethod::kVariationEdges:
        p = variation_coarsen(sub, VariationCandidates::kEdges, cfg.ratio,
                              std::min(cfg.k_eig, nodes.size()), cfg.seed, cfg.max_levels);
        break;
      case CoarsenMethod::kHeavyEdge:
        p = heavy_edge_coarsen(sub, cfg.ratio, cfg.seed);
        break;
      case CoarsenMethod::kIdentity:
        p = Partition::identity(nodes.size());
        break;
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      assignment[nodes[i]] = offset + p.cluster_of(i);
    }
    offset += p.num_clusters();
  }
  return Partition::from_assignment(std::move(assignment));
}

}  // namespace gcs
