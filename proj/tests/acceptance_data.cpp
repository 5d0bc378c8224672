// Dataset-gated acceptance: desk-scale reproduction on the Cora citation
// graph (criteria 9-11). The bundle is not shipped with the repository; point
// GCS_CORA_DIR (or argv[1]) at a directory in the documented bundle format
// (edges.tsv / features.csv / labels.csv / split.tsv with the fixed public
// split). Without it the binary reports BLOCKED and exits 77 so the test
// harness records a skip instead of a fabricated pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "gcs/bundle_io.hpp"
#include "gcs/pipeline.hpp"

using namespace gcs;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& what, double value) {
  std::printf("criterion %2d: %s  %s (observed %.4g)\n", id, pass ? "PASS" : "FAIL", what.c_str(),
              value);
  if (!pass) ++failures;
}

bool within(double value, double center, double tol) {
  return std::fabs(value - center) <= tol;
}

ExperimentConfig gcn_config(double ratio, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.model = ModelKind::kGcn;
  cfg.coarsen.method = ratio >= 1.0 ? CoarsenMethod::kIdentity
                                    : CoarsenMethod::kVariationNeighborhoods;
  cfg.coarsen.ratio = ratio;
  cfg.coarsen.seed = seed;
  cfg.train.learning_rate = 0.01;
  cfg.train.weight_decay = 5e-4;
  cfg.train.epochs = 60;
  cfg.train.patience = 10;
  cfg.train.hidden_dim = 64;
  cfg.train.dropout_rate = 0.5;
  cfg.train.seed = seed;
  cfg.runs = 20;
  return cfg;
}

ExperimentConfig appnp_config(double ratio, std::uint64_t seed) {
  ExperimentConfig cfg = gcn_config(ratio, seed);
  cfg.model = ModelKind::kAppnp;
  cfg.beta = 0.1;
  cfg.k_steps = 10;
  cfg.train.epochs = 200;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  std::filesystem::path dir;
  if (const char* env = std::getenv("GCS_CORA_DIR"); env != nullptr && *env != '\0') {
    dir = env;
  } else if (argc > 1) {
    dir = argv[1];
  }
  if (dir.empty() || !std::filesystem::exists(dir / "edges.tsv")) {
    for (int id : {9, 10, 11}) {
      std::printf("criterion %2d: BLOCKED  Cora bundle not available (set GCS_CORA_DIR)\n", id);
    }
    return 77;
  }

  GraphBundle bundle;
  try {
    bundle = load_graph_bundle(dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failed to load %s: %s\n", dir.string().c_str(), e.what());
    return 2;
  }
  const std::size_t n = bundle.graph.num_nodes();
  const std::size_t d = bundle.features.cols();

  // ---- Criterion 9: Table 1 reproduction, 20 runs per cell, < 10 min. ----
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentReport gcn_full = run_pipeline(bundle, gcn_config(1.0, 0));
  const ExperimentReport gcn_half = run_pipeline(bundle, gcn_config(0.5, 0));
  const ExperimentReport gcn_tenth = run_pipeline(bundle, gcn_config(0.1, 0));
  const ExperimentReport appnp_full = run_pipeline(bundle, appnp_config(1.0, 0));
  const ExperimentReport appnp_half = run_pipeline(bundle, appnp_config(0.5, 0));
  const double table_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  struct Cell {
    const char* name;
    double got;
    double center;
    double tol;
  };
  const std::vector<Cell> cells{
      {"GCN full", 100.0 * gcn_full.mean_accuracy, 81.5, 2.0},
      {"GCN c=0.5", 100.0 * gcn_half.mean_accuracy, 82.7, 2.0},
      {"GCN c=0.1", 100.0 * gcn_tenth.mean_accuracy, 77.8, 2.5},
      {"APPNP full", 100.0 * appnp_full.mean_accuracy, 83.3, 2.0},
      {"APPNP c=0.5", 100.0 * appnp_half.mean_accuracy, 83.7, 2.0},
  };
  bool table_ok = table_sec < 600.0;
  double table_worst = 0.0;
  for (const Cell& cell : cells) {
    const bool ok = within(cell.got, cell.center, cell.tol);
    std::printf("    %-12s %.2f (target %.1f +- %.1f) %s\n", cell.name, cell.got, cell.center,
                cell.tol, ok ? "ok" : "OFF");
    table_ok = table_ok && ok;
    table_worst = std::max(table_worst, std::fabs(cell.got - cell.center) / cell.tol);
  }
  report(9, table_ok, "Cora Table-1 cells within tolerance, runtime " +
                          std::to_string(table_sec) + "s", table_worst);

  // ---- Criterion 10: reduction contract and memory proportionality. ----
  // Slack: nodes living in components of at most 10 nodes stay uncoarsened.
  std::vector<std::size_t> comp = connected_components(bundle.graph);
  std::size_t num_comp = 0;
  for (std::size_t c : comp) num_comp = std::max(num_comp, c + 1);
  std::vector<std::size_t> comp_size(num_comp, 0);
  for (std::size_t c : comp) ++comp_size[c];
  std::size_t slack = 0;
  for (std::size_t s : comp_size) {
    if (s <= 10) slack += s;
  }

  bool contract_ok = true;
  double worst_dev = 0.0;
  for (double c : {0.7, 0.5, 0.3, 0.1}) {
    CoarsenConfig cc;
    cc.method = CoarsenMethod::kVariationNeighborhoods;
    cc.ratio = c;
    const Partition p = coarsen(bundle.graph, cc);
    const std::size_t limit =
        static_cast<std::size_t>(std::ceil(c * static_cast<double>(n))) + slack;
    const bool bound_ok = p.num_clusters() <= limit;
    // Memory proxy: input tensor elements n' * d versus proportional scaling.
    const double proxy_ratio = static_cast<double>(p.num_clusters() * d) /
                               static_cast<double>(n * d);
    const double deviation = std::fabs(proxy_ratio - c) / c;
    std::printf("    ratio %.1f: n'=%zu (limit %zu) proxy %.3f of full (dev %.1f%%)\n", c,
                p.num_clusters(), limit, proxy_ratio, 100.0 * deviation);
    contract_ok = contract_ok && bound_ok && deviation <= 0.15;
    worst_dev = std::max(worst_dev, deviation);
  }
  report(10, contract_ok, "node-count bound + memory proxy within 15%", worst_dev);

  // ---- Criterion 11: method comparison at c = 0.5. ----
  ExperimentConfig spectral_cfg = gcn_config(0.5, 0);
  spectral_cfg.coarsen.method = CoarsenMethod::kSpectral;
  const ExperimentReport spectral_half = run_pipeline(bundle, spectral_cfg);
  const bool faster = gcn_half.coarsen_time_sec < spectral_half.coarsen_time_sec;
  const bool vn_acc = within(100.0 * gcn_half.mean_accuracy, 82.7, 2.5);
  const bool sp_acc = within(100.0 * spectral_half.mean_accuracy, 81.5, 2.5);
  std::printf("    variation %.2fs / %.2f%%, spectral %.2fs / %.2f%%\n",
              gcn_half.coarsen_time_sec, 100.0 * gcn_half.mean_accuracy,
              spectral_half.coarsen_time_sec, 100.0 * spectral_half.mean_accuracy);
  report(11, faster && vn_acc && sp_acc,
         "variation faster than spectral, both near Table-2 accuracy",
         spectral_half.coarsen_time_sec - gcn_half.coarsen_time_sec);

  return failures > 0 ? 1 : 0;
}
