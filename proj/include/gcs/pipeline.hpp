#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gcs/coarsen.hpp"
#include "gcs/graph.hpp"
#include "gcs/metrics.hpp"
#include "gcs/nn.hpp"
#include "gcs/partition.hpp"

namespace gcs {

// End-to-end experiment: coarsen -> train on the coarse graph -> evaluate the
// trained parameters on the original graph's test split.

enum class SplitMode { kFixed, kRandom };

struct ExperimentConfig {
  ModelKind model = ModelKind::kGcn;
  CoarsenConfig coarsen;
  TrainConfig train;
  std::size_t runs = 1;
  LabelPolicy label_policy = LabelPolicy::kDiscardMixed;
  FeatureMode feature_mode = FeatureMode::kNormalized;
  SplitMode split_mode = SplitMode::kFixed;
  std::size_t split_train_per_class = 20;
  std::size_t split_val_per_class = 30;
  double beta = 0.1;         // APPNP teleport probability
  std::size_t k_steps = 10;  // APPNP propagation steps
  bool compute_errors = false;  // spectral/nuclear/restricted-L diagnostics
};

struct RunRecord {
  std::uint64_t seed = 0;
  Metrics metrics;
};

struct ExperimentReport {
  std::size_t original_nodes = 0;
  std::size_t original_edges = 0;
  std::size_t coarse_nodes = 0;
  std::size_t coarse_edges = 0;
  std::size_t coarse_train_nodes = 0;
  std::size_t coarse_val_nodes = 0;
  std::size_t dropped_unlabeled_isolated = 0;
  double coarsen_time_sec = 0.0;
  std::vector<RunRecord> runs;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // sample standard deviation (n-1), 0 for one run
  std::optional<ErrorReport> errors;
};

// Stratified per-class split; remainder becomes test. Deterministic per seed.
LabelledSplit random_split(const std::vector<int>& labels, std::size_t num_classes,
                           std::size_t train_per_class, std::size_t val_per_class,
                           std::uint64_t seed);

ExperimentReport run_pipeline(const GraphBundle& bundle, const ExperimentConfig& cfg);

struct SweepCell {
  CoarsenMethod method = CoarsenMethod::kIdentity;
  double ratio = 1.0;
  std::optional<ExperimentReport> report;
  std::string error;  // non-empty when the cell failed
};

std::vector<SweepCell> sweep(const GraphBundle& bundle, const ExperimentConfig& base,
                             const std::vector<CoarsenMethod>& methods,
                             const std::vector<double>& ratios);

struct VerifyCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;      // observed quantity
  double tolerance = 0.0;  // pinned threshold
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_passed() const;
};

// Randomized invariant suite on synthetic graphs. Full mode uses more and
// larger instances.
VerifyReport run_verification(bool full, std::uint64_t seed);

void write_report_json(const std::filesystem::path& file, const ExperimentConfig& cfg,
                       const ExperimentReport& report);
void write_sweep_json(const std::filesystem::path& file, const ExperimentConfig& cfg,
                      const std::vector<SweepCell>& cells);
void write_verify_json(const std::filesystem::path& file, const VerifyReport& report);

}  // namespace gcs
