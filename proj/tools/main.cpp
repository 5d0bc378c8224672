#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gcs/bundle_io.hpp"
#include "gcs/coarsen.hpp"
#include "gcs/kernels.hpp"
#include "gcs/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitVerify = 3;

struct CommonArgs {
  std::string dataset;
  std::string model = "gcn";
  std::string method = "variation_neighborhoods";
  double ratio = 0.5;
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t workers = 1;

  // Hyperparameters shared by train/pipeline/sweep.
  double lr = 0.01;
  double weight_decay = 5e-4;
  std::size_t epochs = 200;
  std::size_t patience = 10;
  std::size_t hidden = 64;
  double dropout = 0.5;
  double beta = 0.1;
  std::size_t k_steps = 10;
  std::size_t k_eig = 10;
  std::string label_policy = "discard_mixed";
  std::string feature_mode = "normalized";
  std::string split_mode = "fixed";
  bool compute_errors = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_dataset) {
  auto* ds = cmd->add_option("--dataset", args.dataset, "graph bundle directory");
  if (needs_dataset) ds->required();
  cmd->add_option("--seed", args.seed, "base RNG seed");
  cmd->add_option("--out", args.out, "output path");
  cmd->add_option("--workers", args.workers, "worker threads (reserved)")
      ->check(CLI::PositiveNumber);
}

void add_train_options(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--model", args.model, "gcn | appnp");
  cmd->add_option("--runs", args.runs, "repeated runs with seed+i")->check(CLI::PositiveNumber);
  cmd->add_option("--lr", args.lr, "learning rate");
  cmd->add_option("--weight-decay", args.weight_decay, "L2 penalty");
  cmd->add_option("--epochs", args.epochs, "max epochs");
  cmd->add_option("--patience", args.patience, "early-stopping patience");
  cmd->add_option("--hidden", args.hidden, "hidden dimension");
  cmd->add_option("--dropout", args.dropout, "dropout rate");
  cmd->add_option("--beta", args.beta, "APPNP teleport probability");
  cmd->add_option("--k-steps", args.k_steps, "APPNP propagation steps");
  cmd->add_option("--label-policy", args.label_policy, "discard_mixed | argmax");
  cmd->add_option("--feature-mode", args.feature_mode, "normalized | mean");
  cmd->add_option("--split-mode", args.split_mode, "fixed | random");
}

void add_coarsen_options(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--method", args.method,
                  "spectral | variation_neighborhoods | variation_edges | heavy_edge | identity");
  cmd->add_option("--ratio", args.ratio, "fraction of nodes kept, in (0, 1]");
  cmd->add_option("--k-eig", args.k_eig, "eigenvectors for spectral/variation scoring");
}

gcs::ExperimentConfig to_experiment_config(const CommonArgs& args) {
  gcs::ExperimentConfig cfg;
  cfg.model = gcs::model_kind_from_string(args.model);
  cfg.coarsen.method = gcs::coarsen_method_from_string(args.method);
  cfg.coarsen.ratio = args.ratio;
  cfg.coarsen.k_eig = args.k_eig;
  cfg.coarsen.seed = args.seed;
  cfg.train.learning_rate = args.lr;
  cfg.train.weight_decay = args.weight_decay;
  cfg.train.epochs = args.epochs;
  cfg.train.patience = args.patience;
  cfg.train.hidden_dim = args.hidden;
  cfg.train.dropout_rate = args.dropout;
  cfg.train.seed = args.seed;
  cfg.runs = args.runs;
  cfg.beta = args.beta;
  cfg.k_steps = args.k_steps;
  cfg.compute_errors = args.compute_errors;
  if (args.label_policy == "discard_mixed") {
    cfg.label_policy = gcs::LabelPolicy::kDiscardMixed;
  } else if (args.label_policy == "argmax") {
    cfg.label_policy = gcs::LabelPolicy::kArgmax;
  } else {
    throw CLI::ValidationError("--label-policy", "unknown policy: " + args.label_policy);
  }
  if (args.feature_mode == "normalized") {
    cfg.feature_mode = gcs::FeatureMode::kNormalized;
  } else if (args.feature_mode == "mean") {
    cfg.feature_mode = gcs::FeatureMode::kMean;
  } else {
    throw CLI::ValidationError("--feature-mode", "unknown mode: " + args.feature_mode);
  }
  if (args.split_mode == "fixed") {
    cfg.split_mode = gcs::SplitMode::kFixed;
  } else if (args.split_mode == "random") {
    cfg.split_mode = gcs::SplitMode::kRandom;
  } else {
    throw CLI::ValidationError("--split-mode", "unknown mode: " + args.split_mode);
  }
  return cfg;
}

void print_report(const gcs::ExperimentReport& report) {
  std::printf("nodes %zu -> %zu, edges %zu -> %zu, coarsen %.3fs\n", report.original_nodes,
              report.coarse_nodes, report.original_edges, report.coarse_edges,
              report.coarsen_time_sec);
  std::printf("coarse train/val nodes: %zu / %zu (dropped %zu isolated unlabeled)\n",
              report.coarse_train_nodes, report.coarse_val_nodes,
              report.dropped_unlabeled_isolated);
  for (const auto& run : report.runs) {
    std::printf("  seed %llu: test acc %.4f, stop epoch %zu, val loss %.4f, %.2fs\n",
                static_cast<unsigned long long>(run.seed), run.metrics.test_accuracy,
                run.metrics.stop_epoch, run.metrics.best_val_loss, run.metrics.wall_time_sec);
  }
  std::printf("test accuracy: %.4f +- %.4f over %zu run(s)\n", report.mean_accuracy,
              report.std_accuracy, report.runs.size());
  if (report.errors) {
    std::printf("errors: nuclear %.6g, kmeans %.6g, spectral %.6g, restricted-L %.6g, "
                "violations %zu\n",
                report.errors->nuclear_error, report.errors->kmeans_cost,
                report.errors->spectral_error, report.errors->restricted_l_error,
                report.errors->bound_violations);
  }
}

gcs::GraphBundle load_dataset(const std::string& dir) {
  gcs::BundleLoadReport report;
  gcs::GraphBundle bundle = gcs::load_graph_bundle(dir, &report);
  for (const auto& warning : report.warnings) std::cerr << "warning: " << warning << "\n";
  return bundle;
}

int cmd_coarsen(const CommonArgs& args) {
  gcs::CoarsenConfig cfg;
  cfg.method = gcs::coarsen_method_from_string(args.method);
  cfg.ratio = args.ratio;
  cfg.k_eig = args.k_eig;
  cfg.seed = args.seed;
  cfg.validate();
  const gcs::GraphBundle bundle = load_dataset(args.dataset);
  const gcs::Partition p = gcs::coarsen(bundle.graph, cfg);
  const gcs::CoarseGraph cg = gcs::coarse_graph(bundle.graph, p);
  std::printf("%zu nodes -> %zu super-nodes, %zu -> %zu edges\n", bundle.graph.num_nodes(),
              p.num_clusters(), bundle.graph.num_edges(), cg.num_edges());
  if (!args.out.empty()) {
    gcs::save_partition(args.out, p.assignment());
    std::printf("partition written to %s\n", args.out.c_str());
  }
  return kExitOk;
}

int cmd_run(const CommonArgs& args, bool baseline) {
  gcs::ExperimentConfig cfg = to_experiment_config(args);
  if (baseline) {
    cfg.coarsen.method = gcs::CoarsenMethod::kIdentity;
    cfg.coarsen.ratio = 1.0;
  }
  cfg.coarsen.validate();
  const gcs::GraphBundle bundle = load_dataset(args.dataset);
  const gcs::ExperimentReport report = gcs::run_pipeline(bundle, cfg);
  print_report(report);
  if (!args.out.empty()) gcs::write_report_json(args.out, cfg, report);
  return kExitOk;
}

int cmd_sweep(const CommonArgs& args, const std::vector<std::string>& methods,
              const std::vector<double>& ratios) {
  const gcs::ExperimentConfig base = to_experiment_config(args);
  const gcs::GraphBundle bundle = load_dataset(args.dataset);
  std::vector<gcs::CoarsenMethod> parsed;
  for (const auto& m : methods) parsed.push_back(gcs::coarsen_method_from_string(m));
  const auto cells = gcs::sweep(bundle, base, parsed, ratios);
  for (const auto& cell : cells) {
    if (cell.report) {
      std::printf("%-25s ratio %.2f: acc %.4f +- %.4f (n'=%zu)\n",
                  gcs::to_string(cell.method).c_str(), cell.ratio, cell.report->mean_accuracy,
                  cell.report->std_accuracy, cell.report->coarse_nodes);
    } else {
      std::printf("%-25s ratio %.2f: FAILED (%s)\n", gcs::to_string(cell.method).c_str(),
                  cell.ratio, cell.error.c_str());
    }
  }
  if (!args.out.empty()) gcs::write_sweep_json(args.out, base, cells);
  return kExitOk;
}

int cmd_verify(const CommonArgs& args, bool full) {
  const gcs::VerifyReport report = gcs::run_verification(full, args.seed);
  for (const auto& check : report.checks) {
    std::printf("%-32s %s (value %.3g, tol %.3g)\n", check.name.c_str(),
                check.passed ? "pass" : "FAIL", check.value, check.tolerance);
  }
  if (!args.out.empty()) gcs::write_verify_json(args.out, report);
  return report.all_passed() ? kExitOk : kExitVerify;
}

int cmd_synth(const CommonArgs& args, const std::vector<std::size_t>& blocks, double intra,
              double inter, std::size_t feature_dim, std::size_t train_per_class,
              std::size_t val_per_class) {
  gcs::GraphBundle bundle = gcs::sbm_generate(blocks, intra, inter, feature_dim, args.seed);
  bundle.split = gcs::random_split(bundle.split.labels, bundle.split.num_classes,
                                   train_per_class, val_per_class, args.seed);
  gcs::save_graph_bundle(args.out, bundle);
  std::printf("wrote %zu nodes / %zu edges to %s\n", bundle.graph.num_nodes(),
              bundle.graph.num_edges(), args.out.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph coarsening + GNN training toolkit"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  // Options can also come from an INI file; keys live under a section named
  // after the subcommand, e.g. [train] dataset=... epochs=...
  app.set_config("--config", "", "read options from an INI file (sections per subcommand)");
  app.fallthrough();

  CommonArgs args;

  auto* coarsen_cmd = app.add_subcommand("coarsen", "coarsen a graph and write the partition");
  add_common(coarsen_cmd, args, true);
  add_coarsen_options(coarsen_cmd, args);

  auto* train_cmd = app.add_subcommand("train", "train on the original graph (no coarsening)");
  add_common(train_cmd, args, true);
  add_train_options(train_cmd, args);

  auto* pipeline_cmd =
      app.add_subcommand("pipeline", "coarsen, train on the coarse graph, evaluate on the original");
  add_common(pipeline_cmd, args, true);
  add_train_options(pipeline_cmd, args);
  add_coarsen_options(pipeline_cmd, args);
  pipeline_cmd->add_flag("--errors", args.compute_errors,
                         "also compute spectral approximation diagnostics");

  std::vector<std::string> sweep_methods{"variation_neighborhoods", "spectral", "heavy_edge"};
  std::vector<double> sweep_ratios{0.5, 0.3, 0.1};
  auto* sweep_cmd = app.add_subcommand("sweep", "grid over methods x ratios");
  add_common(sweep_cmd, args, true);
  add_train_options(sweep_cmd, args);
  sweep_cmd->add_option("--k-eig", args.k_eig, "eigenvectors for spectral/variation scoring");
  sweep_cmd->add_option("--methods", sweep_methods, "coarsening methods to try");
  sweep_cmd->add_option("--ratios", sweep_ratios, "ratios to try");

  bool verify_full = false;
  auto* verify_cmd = app.add_subcommand("verify", "run the numerical invariant suite");
  add_common(verify_cmd, args, false);
  verify_cmd->add_flag("--full", verify_full, "larger instances, more samples");

  std::vector<std::size_t> synth_blocks{60, 60, 60};
  double synth_intra = 0.2;
  double synth_inter = 0.02;
  std::size_t synth_features = 16;
  std::size_t synth_train = 20;
  std::size_t synth_val = 30;
  auto* synth_cmd = app.add_subcommand("synth", "generate a stochastic block model bundle");
  add_common(synth_cmd, args, false);
  synth_cmd->add_option("--blocks", synth_blocks, "block sizes");
  synth_cmd->add_option("--intra", synth_intra, "intra-block edge probability");
  synth_cmd->add_option("--inter", synth_inter, "inter-block edge probability");
  synth_cmd->add_option("--features", synth_features, "feature dimension");
  synth_cmd->add_option("--train-per-class", synth_train, "train nodes per class");
  synth_cmd->add_option("--val-per-class", synth_val, "val nodes per class");
  synth_cmd->get_option("--out")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (coarsen_cmd->parsed()) return cmd_coarsen(args);
    if (train_cmd->parsed()) return cmd_run(args, /*baseline=*/true);
    if (pipeline_cmd->parsed()) return cmd_run(args, /*baseline=*/false);
    if (sweep_cmd->parsed()) return cmd_sweep(args, sweep_methods, sweep_ratios);
    if (verify_cmd->parsed()) return cmd_verify(args, verify_full);
    if (synth_cmd->parsed()) {
      return cmd_synth(args, synth_blocks, synth_intra, synth_inter, synth_features, synth_train,
                       synth_val);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const gcs::BundleError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
