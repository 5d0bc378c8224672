#include "gcs/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "gcs/eigensolve.hpp"

namespace gcs {
namespace {

using json = nlohmann::json;

double elapsed_sec(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Nodes that are isolated and unlabeled carry no signal for either
// coarsening or training; drop them before building the working graph.
std::vector<std::size_t> informative_nodes(const GraphBundle& bundle) {
  std::vector<std::size_t> keep;
  keep.reserve(bundle.graph.num_nodes());
  for (std::size_t v = 0; v < bundle.graph.num_nodes(); ++v) {
    const bool isolated = bundle.graph.neighbor_begin(v) == bundle.graph.neighbor_end(v);
    if (!isolated || bundle.split.labels[v] >= 0) keep.push_back(v);
  }
  return keep;
}

DenseMatrix select_rows(const DenseMatrix& x, const std::vector<std::size_t>& keep) {
  DenseMatrix out(keep.size(), x.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = x(keep[i], j);
  }
  return out;
}

LabelledSplit remap_split(const LabelledSplit& split, const std::vector<std::size_t>& keep,
                          std::size_t n) {
  std::vector<std::size_t> new_index(n, static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < keep.size(); ++i) new_index[keep[i]] = i;
  LabelledSplit out;
  out.num_classes = split.num_classes;
  out.labels.resize(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) out.labels[i] = split.labels[keep[i]];
  const auto remap = [&](const std::vector<std::size_t>& idx) {
    std::vector<std::size_t> mapped;
    mapped.reserve(idx.size());
    for (std::size_t v : idx) {
      if (new_index[v] != static_cast<std::size_t>(-1)) mapped.push_back(new_index[v]);
    }
    return mapped;
  };
  out.train = remap(split.train);
  out.val = remap(split.val);
  out.test = remap(split.test);
  return out;
}

std::vector<int> mask_labels(const std::vector<int>& labels, std::size_t n) {
  std::vector<int> out(n, -1);
  for (std::size_t i = 0; i < std::min(n, labels.size()); ++i) out[i] = labels[i];
  return out;
}

json metrics_json(const Metrics& m) {
  return json{{"stop_epoch", m.stop_epoch},
              {"best_val_loss", m.best_val_loss},
              {"test_accuracy", m.test_accuracy},
              {"wall_time_sec", m.wall_time_sec},
              {"peak_tensor_elements", m.peak_tensor_elements},
              {"epochs_run", m.train_losses.size()}};
}

json config_json(const ExperimentConfig& cfg) {
  return json{{"model", to_string(cfg.model)},
              {"method", to_string(cfg.coarsen.method)},
              {"ratio", cfg.coarsen.ratio},
              {"k_eig", cfg.coarsen.k_eig},
              {"runs", cfg.runs},
              {"learning_rate", cfg.train.learning_rate},
              {"weight_decay", cfg.train.weight_decay},
              {"epochs", cfg.train.epochs},
              {"patience", cfg.train.patience},
              {"hidden_dim", cfg.train.hidden_dim},
              {"dropout", cfg.train.dropout_rate},
              {"seed", cfg.train.seed},
              {"beta", cfg.beta},
              {"k_steps", cfg.k_steps},
              {"label_policy",
               cfg.label_policy == LabelPolicy::kDiscardMixed ? "discard_mixed" : "argmax"},
              {"feature_mode", cfg.feature_mode == FeatureMode::kNormalized ? "normalized" : "mean"},
              {"split_mode", cfg.split_mode == SplitMode::kFixed ? "fixed" : "random"}};
}

json report_json(const ExperimentReport& report) {
  json runs = json::array();
  for (const auto& run : report.runs) {
    json r = metrics_json(run.metrics);
    r["seed"] = run.seed;
    runs.push_back(std::move(r));
  }
  json out{{"original_nodes", report.original_nodes},
           {"original_edges", report.original_edges},
           {"coarse_nodes", report.coarse_nodes},
           {"coarse_edges", report.coarse_edges},
           {"coarse_train_nodes", report.coarse_train_nodes},
           {"coarse_val_nodes", report.coarse_val_nodes},
           {"dropped_unlabeled_isolated", report.dropped_unlabeled_isolated},
           {"coarsen_time_sec", report.coarsen_time_sec},
           {"mean_accuracy", report.mean_accuracy},
           {"std_accuracy", report.std_accuracy},
           {"runs", std::move(runs)}};
  if (report.errors) {
    out["errors"] = json{{"nuclear_error", report.errors->nuclear_error},
                         {"kmeans_cost", report.errors->kmeans_cost},
                         {"spectral_error", report.errors->spectral_error},
                         {"restricted_l_error", report.errors->restricted_l_error},
                         {"bound_violations", report.errors->bound_violations}};
  }
  return out;
}

void write_json_file(const std::filesystem::path& file, const json& j) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << j.dump(2) << "\n";
}

}  // namespace

LabelledSplit random_split(const std::vector<int>& labels, std::size_t num_classes,
                           std::size_t train_per_class, std::size_t val_per_class,
                           std::uint64_t seed) {
  LabelledSplit split;
  split.labels = labels;
  split.num_classes = num_classes;
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t v = 0; v < labels.size(); ++v) {
    if (labels[v] >= 0) by_class[static_cast<std::size_t>(labels[v])].push_back(v);
  }
  std::mt19937_64 rng(seed);
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto& nodes = by_class[c];
    if (nodes.size() < train_per_class + val_per_class + 1) {
      throw std::runtime_error("random_split: class " + std::to_string(c) +
                               " has too few labeled nodes");
    }
    std::shuffle(nodes.begin(), nodes.end(), rng);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (i < train_per_class) {
        split.train.push_back(nodes[i]);
      } else if (i < train_per_class + val_per_class) {
        split.val.push_back(nodes[i]);
      } else {
        split.test.push_back(nodes[i]);
      }
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

ExperimentReport run_pipeline(const GraphBundle& bundle, const ExperimentConfig& cfg) {
  cfg.coarsen.validate();
  if (cfg.runs == 0) throw std::invalid_argument("runs must be positive");

  GraphBundle working = bundle;
  if (cfg.split_mode == SplitMode::kRandom) {
    working.split = random_split(working.split.labels, working.split.num_classes,
                                 cfg.split_train_per_class, cfg.split_val_per_class,
                                 cfg.train.seed);
  }
  if (working.split.num_classes == 0 || working.split.train.empty() ||
      working.split.val.empty() || working.split.test.empty()) {
    throw std::runtime_error("bundle is missing a usable train/val/test split");
  }

  ExperimentReport report;
  report.original_nodes = working.graph.num_nodes();
  report.original_edges = working.graph.num_edges();

  const std::vector<std::size_t> keep = informative_nodes(working);
  report.dropped_unlabeled_isolated = working.graph.num_nodes() - keep.size();
  Graph train_graph = working.graph;
  DenseMatrix train_features = working.features;
  LabelledSplit train_split = working.split;
  if (!keep.empty() && keep.size() < working.graph.num_nodes()) {
    train_graph = induced_subgraph(working.graph, keep);
    train_features = select_rows(working.features, keep);
    train_split = remap_split(working.split, keep, working.graph.num_nodes());
  }

  const auto coarsen_start = std::chrono::steady_clock::now();
  const Partition partition = coarsen(train_graph, cfg.coarsen);
  report.coarsen_time_sec = elapsed_sec(coarsen_start);

  const CoarseGraph coarse = coarse_graph(train_graph, partition);
  report.coarse_nodes = coarse.num_nodes();
  report.coarse_edges = coarse.num_edges();

  const DenseMatrix coarse_x = coarse_features(train_features, partition, cfg.feature_mode);
  const CoarseLabels labels = coarse_labels(train_split, partition, cfg.label_policy);
  report.coarse_train_nodes = labels.train_mask.size();
  report.coarse_val_nodes = labels.val_mask.size();
  if (labels.train_mask.empty() || labels.val_mask.empty()) {
    throw std::runtime_error("coarse split is empty; lower the ratio or use argmax labels");
  }

  ModelConfig model;
  model.kind = cfg.model;
  model.in_dim = coarse_x.cols();
  model.hidden_dim = cfg.train.hidden_dim;
  model.out_dim = working.split.num_classes;
  model.beta = cfg.beta;
  model.k_steps = cfg.k_steps;

  const std::vector<int> test_labels = mask_labels(working.split.labels, working.graph.num_nodes());

  std::vector<double> accuracies;
  for (std::size_t r = 0; r < cfg.runs; ++r) {
    TrainConfig train_cfg = cfg.train;
    train_cfg.seed = cfg.train.seed + r;
    TrainResult result = train(model, coarse.prop, coarse_x, labels.train_labels,
                               labels.train_mask, labels.val_labels, labels.val_mask, train_cfg);
    result.metrics.test_accuracy =
        predict_full(working.graph, working.features, model, result.params, test_labels,
                     working.split.test);
    accuracies.push_back(result.metrics.test_accuracy);
    report.runs.push_back({train_cfg.seed, std::move(result.metrics)});
  }

  report.mean_accuracy =
      std::accumulate(accuracies.begin(), accuracies.end(), 0.0) / accuracies.size();
  if (accuracies.size() > 1) {
    double ss = 0.0;
    for (double a : accuracies) ss += (a - report.mean_accuracy) * (a - report.mean_accuracy);
    report.std_accuracy = std::sqrt(ss / (accuracies.size() - 1));
  }

  if (cfg.compute_errors) {
    const std::size_t k = std::min(cfg.coarsen.k_eig, train_graph.num_nodes());
    const EigenPairs pairs = eigen_smallest_k(normalized_laplacian(train_graph), k);
    report.errors = error_report(pairs.vectors, partition, laplacian(train_graph));
  }
  return report;
}

std::vector<SweepCell> sweep(const GraphBundle& bundle, const ExperimentConfig& base,
                             const std::vector<CoarsenMethod>& methods,
                             const std::vector<double>& ratios) {
  std::vector<SweepCell> cells;
  for (CoarsenMethod method : methods) {
    for (double ratio : ratios) {
      SweepCell cell;
      cell.method = method;
      cell.ratio = ratio;
      ExperimentConfig cfg = base;
      cfg.coarsen.method = method;
      cfg.coarsen.ratio = ratio;
      try {
        cell.report = run_pipeline(bundle, cfg);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

bool VerifyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const VerifyCheck& c) { return c.passed; });
}

namespace {

void add_check(VerifyReport& report, const std::string& name, double value, double tolerance) {
  report.checks.push_back({name, value <= tolerance, value, tolerance});
}

GraphBundle verify_fixture(std::size_t block, std::uint64_t seed) {
  return sbm_generate({block, block, block}, 0.4, 0.05, 8, seed);
}

// Worst relative gradient error against central finite differences on a tiny
// graph, across every parameter element of the given model kind.
double gradient_fd_error(ModelKind kind, std::uint64_t seed) {
  const GraphBundle bundle = verify_fixture(6, seed);
  const SparseMatrix prop = normalized_adjacency_selfloops(bundle.graph);
  ModelConfig model;
  model.kind = kind;
  model.in_dim = bundle.features.cols();
  model.hidden_dim = 5;
  model.out_dim = 3;
  model.beta = 0.15;
  model.k_steps = 6;
  Params params = init_params(model, seed + 1);
  std::vector<std::size_t> mask;
  for (std::size_t v = 0; v < bundle.graph.num_nodes(); v += 2) mask.push_back(v);
  std::vector<int> labels(bundle.graph.num_nodes());
  for (std::size_t v = 0; v < labels.size(); ++v) labels[v] = static_cast<int>(v % 3);

  const auto loss_at = [&](const Params& p) {
    const DenseMatrix logits = model_forward(model, prop, bundle.features, p);
    return masked_cross_entropy(logits, labels, mask).loss;
  };

  ForwardCache cache;
  const DenseMatrix logits = model_forward(model, prop, bundle.features, params, 0.0,
                                           std::nullopt, &cache);
  const LossResult loss = masked_cross_entropy(logits, labels, mask);
  const Params grads = backward(model, prop, params, cache, loss.grad, 0.0);

  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t b = 0; b < params.blocks.size(); ++b) {
    for (std::size_t i = 0; i < params.blocks[b].size(); ++i) {
      const double saved = params.blocks[b].data()[i];
      params.blocks[b].data()[i] = saved + h;
      const double up = loss_at(params);
      params.blocks[b].data()[i] = saved - h;
      const double down = loss_at(params);
      params.blocks[b].data()[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double denom = std::max({std::fabs(fd), std::fabs(grads.blocks[b].data()[i]), 1e-8});
      worst = std::max(worst, std::fabs(fd - grads.blocks[b].data()[i]) / denom);
    }
  }
  return worst;
}

}  // namespace

VerifyReport run_verification(bool full, std::uint64_t seed) {
  VerifyReport report;
  const std::size_t instances = full ? 20 : 5;
  const std::size_t block = full ? 30 : 12;

  double nuclear_gap = 0.0;
  double spectral_excess = 0.0;
  double identity_gap = 0.0;
  double nesting_gap = 0.0;
  long violations = 0;
  double appnp_gap = 0.0;
  double reduced_gap = 0.0;
  double reduced_grad = 0.0;

  for (std::size_t t = 0; t < instances; ++t) {
    const std::uint64_t s = seed + 1000 * t;
    const GraphBundle bundle = verify_fixture(block, s);
    const Graph& g = bundle.graph;
    const std::size_t n = g.num_nodes();
    const std::size_t k = std::max<std::size_t>(2, n / 4);

    CoarsenConfig cc;
    cc.method = t % 2 == 0 ? CoarsenMethod::kSpectral : CoarsenMethod::kVariationNeighborhoods;
    cc.ratio = static_cast<double>(k) / static_cast<double>(n);
    cc.k_eig = 6;
    cc.seed = s;
    const Partition p = coarsen(g, cc);

    const EigenPairs pairs = eigen_smallest_k(normalized_laplacian(g), 6);
    nuclear_gap = std::max(nuclear_gap,
                           std::fabs(nuclear_error(pairs.vectors, p) - kmeans_cost(pairs.vectors, p)));
    spectral_excess = std::max(
        spectral_excess, spectral_error(pairs.vectors, p) - nuclear_error(pairs.vectors, p));

    const SparseMatrix l = laplacian(g);
    const long v = epsilon_similarity_check(l, p, pairs.vectors, full ? 500 : 100, s);
    if (v > 0) violations += v;

    // Identity partition leaves the propagation matrix untouched.
    const CoarseGraph id_coarse = coarse_graph(g, Partition::identity(n));
    identity_gap = std::max(identity_gap,
                            max_abs_diff(id_coarse.prop.to_dense(),
                                         normalized_adjacency_selfloops(g).to_dense()));

    // Two-level aggregation matches the composed one-shot partition.
    CoarsenConfig inner_cc = cc;
    inner_cc.ratio = 0.6;
    inner_cc.method = CoarsenMethod::kHeavyEdge;
    const Partition inner = coarsen(g, inner_cc);
    const CoarseGraph level1 = coarse_graph(g, inner);
    std::vector<std::size_t> outer_assign(inner.num_clusters());
    for (std::size_t j = 0; j < inner.num_clusters(); ++j) outer_assign[j] = j / 2;
    const Partition outer = Partition::from_assignment(outer_assign);
    const CoarseGraph nested = coarse_graph(level1, outer);
    const CoarseGraph direct = coarse_graph(g, compose(outer, inner));
    nesting_gap = std::max(nesting_gap,
                           max_abs_diff(nested.prop.to_dense(), direct.prop.to_dense()));

    // APPNP power iteration converges to the exact PPNP solve.
    const SparseMatrix prop = normalized_adjacency_selfloops(g);
    const DenseMatrix hmat = gaussian_matrix(n, 4, s + 7);
    const DenseMatrix exact = ppnp_exact(prop, hmat, 0.1);
    DenseMatrix z = hmat;
    for (int it = 0; it < 400; ++it) {
      DenseMatrix pz = prop.multiply(z);
      for (std::size_t i = 0; i < z.size(); ++i) {
        z.data()[i] = 0.9 * pz.data()[i] + 0.1 * hmat.data()[i];
      }
    }
    appnp_gap = std::max(appnp_gap, max_abs_diff(z, exact));

    const ReducedSystemResult reduced =
        reduced_system_check(normalized_matrix(p), g, 0.1, bundle.features);
    reduced_gap = std::max(reduced_gap, reduced.recurrence_vs_solve);
    reduced_grad = std::max(reduced_grad, reduced.stationarity);
  }

  add_check(report, "nuclear_equals_kmeans", nuclear_gap, 1e-8);
  add_check(report, "spectral_le_nuclear", spectral_excess, 1e-10);
  add_check(report, "bound_violations", static_cast<double>(violations), 0.0);
  add_check(report, "identity_partition_prop", identity_gap, 1e-12);
  add_check(report, "nested_coarsening_consistency", nesting_gap, 1e-12);
  add_check(report, "appnp_matches_exact_ppnp", appnp_gap, 1e-8);
  add_check(report, "reduced_system_recurrence", reduced_gap, 1e-6);
  add_check(report, "reduced_system_stationarity", reduced_grad, 1e-7);
  add_check(report, "gcn_gradient_fd", gradient_fd_error(ModelKind::kGcn, seed + 11), 1e-5);
  add_check(report, "appnp_gradient_fd", gradient_fd_error(ModelKind::kAppnp, seed + 13), 1e-5);
  return report;
}

void write_report_json(const std::filesystem::path& file, const ExperimentConfig& cfg,
                       const ExperimentReport& report) {
  json j = report_json(report);
  j["config"] = config_json(cfg);
  write_json_file(file, j);
}

void write_sweep_json(const std::filesystem::path& file, const ExperimentConfig& cfg,
                      const std::vector<SweepCell>& cells) {
  json arr = json::array();
  for (const auto& cell : cells) {
    json c{{"method", to_string(cell.method)}, {"ratio", cell.ratio}};
    if (cell.report) {
      c["report"] = report_json(*cell.report);
    } else {
      c["error"] = cell.error;
    }
    arr.push_back(std::move(c));
  }
  write_json_file(file, json{{"config", config_json(cfg)}, {"cells", std::move(arr)}});
}

void write_verify_json(const std::filesystem::path& file, const VerifyReport& report) {
  json arr = json::array();
  for (const auto& c : report.checks) {
    arr.push_back(json{{"name", c.name},
                       {"passed", c.passed},
                       {"value", c.value},
                       {"tolerance", c.tolerance}});
  }
  write_json_file(file, json{{"all_passed", report.all_passed()}, {"checks", std::move(arr)}});
}

}  // namespace gcs
