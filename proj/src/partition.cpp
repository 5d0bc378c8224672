#include "gcs/partition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace gcs {

Partition Partition::from_assignment(std::vector<std::size_t> assignment) {
  std::vector<std::size_t> values = assignment;
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::map<std::size_t, std::size_t> relabel;
  for (std::size_t i = 0; i < values.size(); ++i) relabel[values[i]] = i;

  Partition p;
  p.assignment_.resize(assignment.size());
  p.sizes_.assign(values.size(), 0);
  p.members_.resize(values.size());
  for (std::size_t v = 0; v < assignment.size(); ++v) {
    const std::size_t j = relabel[assignment[v]];
    p.assignment_[v] = j;
    ++p.sizes_[j];
    p.members_[j].push_back(v);
  }
  return p;
}

Partition Partition::identity(std::size_t n) {
  std::vector<std::size_t> a(n);
  for (std::size_t v = 0; v < n; ++v) a[v] = v;
  return from_assignment(std::move(a));
}

DenseMatrix normalized_matrix(const Partition& p) {
  DenseMatrix m(p.num_nodes(), p.num_clusters());
  for (std::size_t v = 0; v < p.num_nodes(); ++v) {
    const std::size_t j = p.cluster_of(v);
    m(v, j) = 1.0 / std::sqrt(static_cast<double>(p.cluster_size(j)));
  }
  return m;
}

namespace {

CoarseGraph finish_coarse(std::size_t k,
                          std::vector<std::tuple<std::size_t, std::size_t, double>> triplets,
                          std::vector<std::size_t> sizes) {
  CoarseGraph cg;
  cg.weights = SparseMatrix::from_triplets(k, std::move(triplets));
  cg.sizes = std::move(sizes);
  cg.coarse_degrees.resize(k);
  for (std::size_t j = 0; j < k; ++j) cg.coarse_degrees[j] = cg.weights.row_sum(j);

  std::vector<double> dinv(k);
  for (std::size_t j = 0; j < k; ++j) {
    dinv[j] = 1.0 / std::sqrt(cg.coarse_degrees[j] + static_cast<double>(cg.sizes[j]));
  }
  std::vector<std::tuple<std::size_t, std::size_t, double>> prop_triplets;
  prop_triplets.reserve(cg.weights.nnz() + k);
  for (std::size_t i = 0; i < k; ++i) {
    double diag = static_cast<double>(cg.sizes[i]);  // the +C term
    for (std::size_t q = cg.weights.row_ptr()[i]; q < cg.weights.row_ptr()[i + 1]; ++q) {
      const std::size_t j = cg.weights.col()[q];
      if (j == i) {
        diag += cg.weights.val()[q];
      } else {
        prop_triplets.emplace_back(i, j, cg.weights.val()[q] * dinv[i] * dinv[j]);
      }
    }
    prop_triplets.emplace_back(i, i, diag * dinv[i] * dinv[i]);
  }
  cg.prop = SparseMatrix::from_triplets(k, std::move(prop_triplets));
  return cg;
}

}  // namespace

std::size_t CoarseGraph::num_edges() const {
  std::size_t off_diag = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    for (std::size_t q = weights.row_ptr()[i]; q < weights.row_ptr()[i + 1]; ++q) {
      if (weights.col()[q] != i) ++off_diag;
    }
  }
  return off_diag / 2;
}

CoarseGraph coarse_graph(const Graph& g, const Partition& p) {
  if (p.num_nodes() != g.num_nodes()) {
    throw std::invalid_argument("coarse_graph: partition does not cover the graph");
  }
  std::vector<std::tuple<std::size_t, std::size_t, double>> triplets;
  triplets.reserve(g.adjacency().nnz());
  for (std::size_t u = 0; u < g.num_nodes(); ++u) {
    for (std::size_t q = g.neighbor_begin(u); q < g.neighbor_end(u); ++q) {
      triplets.emplace_back(p.cluster_of(u), p.cluster_of(g.neighbor(q)), g.weight(q));
    }
  }
  return finish_coarse(p.num_clusters(), std::move(triplets), p.sizes());
}

CoarseGraph coarse_graph(const CoarseGraph& cg, const Partition& outer) {
  if (outer.num_nodes() != cg.num_nodes()) {
    throw std::invalid_argument("coarse_graph: partition size mismatch");
  }
  std::vector<std::tuple<std::size_t, std::size_t, double>> triplets;
  triplets.reserve(cg.weights.nnz());
  for (std::size_t u = 0; u < cg.weights.size(); ++u) {
    for (std::size_t q = cg.weights.row_ptr()[u]; q < cg.weights.row_ptr()[u + 1]; ++q) {
      triplets.emplace_back(outer.cluster_of(u), outer.cluster_of(cg.weights.col()[q]),
                            cg.weights.val()[q]);
    }
  }
  std::vector<std::size_t> sizes(outer.num_clusters(), 0);
  for (std::size_t u = 0; u < outer.num_nodes(); ++u) {
    sizes[outer.cluster_of(u)] += cg.sizes[u];
  }
  return finish_coarse(outer.num_clusters(), std::move(triplets), std::move(sizes));
}

DenseMatrix coarse_features(const DenseMatrix& x, const Partition& p, FeatureMode mode) {
  if (x.rows() != p.num_nodes()) {
    throw std::invalid_argument("coarse_features: row count mismatch");
  }
  DenseMatrix out(p.num_clusters(), x.cols());
  for (std::size_t v = 0; v < p.num_nodes(); ++v) {
    const std::size_t j = p.cluster_of(v);
    for (std::size_t c = 0; c < x.cols(); ++c) out(j, c) += x(v, c);
  }
  for (std::size_t j = 0; j < p.num_clusters(); ++j) {
    const double cj = static_cast<double>(p.cluster_size(j));
    const double scale = mode == FeatureMode::kNormalized ? 1.0 / std::sqrt(cj) : 1.0 / cj;
    for (std::size_t c = 0; c < x.cols(); ++c) out(j, c) *= scale;
  }
  return out;
}

DenseMatrix lift_rows(const Partition& p, const DenseMatrix& m) {
  if (m.rows() != p.num_clusters()) {
    throw std::invalid_argument("lift_rows: row count mismatch");
  }
  DenseMatrix out(p.num_nodes(), m.cols());
  for (std::size_t v = 0; v < p.num_nodes(); ++v) {
    const std::size_t j = p.cluster_of(v);
    const double scale = 1.0 / std::sqrt(static_cast<double>(p.cluster_size(j)));
    for (std::size_t c = 0; c < m.cols(); ++c) out(v, c) = m(j, c) * scale;
  }
  return out;
}

namespace {

// Aggregate one split's labels per cluster; -1 where absent or discarded.
void aggregate_side(const std::vector<int>& labels, const std::vector<std::size_t>& side,
                    const Partition& p, LabelPolicy policy, std::vector<int>& out) {
  std::map<std::size_t, std::map<int, std::size_t>> counts;
  for (std::size_t v : side) counts[p.cluster_of(v)][labels[v]] += 1;
  for (const auto& [cluster, hist] : counts) {
    if (policy == LabelPolicy::kDiscardMixed) {
      out[cluster] = hist.size() == 1 ? hist.begin()->first : -1;
    } else {
      int best = -1;
      std::size_t best_count = 0;
      for (const auto& [label, count] : hist) {
        if (count > best_count) {  // ties break to lowest class (map order)
          best = label;
          best_count = count;
        }
      }
      out[cluster] = best;
    }
  }
}

}  // namespace

CoarseLabels coarse_labels(const LabelledSplit& split, const Partition& p, LabelPolicy policy) {
  const std::size_t k = p.num_clusters();
  CoarseLabels out;
  out.train_labels.assign(k, -1);
  out.val_labels.assign(k, -1);

  std::vector<bool> has_train(k, false), has_val(k, false);
  for (std::size_t v : split.train) has_train[p.cluster_of(v)] = true;
  for (std::size_t v : split.val) has_val[p.cluster_of(v)] = true;

  aggregate_side(split.labels, split.train, p, policy, out.train_labels);
  aggregate_side(split.labels, split.val, p, policy, out.val_labels);

  for (std::size_t j = 0; j < k; ++j) {
    if (has_train[j] && has_val[j]) {
      // Train/val overlap inside one super-node leaks validation signal;
      // drop it from both sides.
      out.train_labels[j] = -1;
      out.val_labels[j] = -1;
      continue;
    }
    if (has_train[j] && out.train_labels[j] >= 0) out.train_mask.push_back(j);
    if (has_val[j] && out.val_labels[j] >= 0) out.val_mask.push_back(j);
  }
  return out;
}

Partition compose(const Partition& outer, const Partition& inner) {
  if (outer.num_nodes() != inner.num_clusters()) {
    throw std::invalid_argument("compose: outer must be defined on inner's clusters");
  }
  std::vector<std::size_t> a(inner.num_nodes());
  for (std::size_t v = 0; v < inner.num_nodes(); ++v) {
    a[v] = outer.cluster_of(inner.cluster_of(v));
  }
  return Partition::from_assignment(std::move(a));
}

}  // namespace gcs
