#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gcs/dense.hpp"
#include "gcs/graph.hpp"
#include "gcs/sparse.hpp"

namespace gcs {

enum class ModelKind { kGcn, kAppnp };

ModelKind model_kind_from_string(const std::string& name);
std::string to_string(ModelKind kind);

// Architecture description; graph-size independent so parameters trained on
// a coarse graph drop into the original-graph model unchanged.
struct ModelConfig {
  ModelKind kind = ModelKind::kGcn;
  std::size_t in_dim = 0;
  std::size_t hidden_dim = 64;
  std::size_t out_dim = 0;
  double beta = 0.1;        // APPNP teleport probability
  std::size_t k_steps = 10; // APPNP propagation steps
};

// Parameter blocks. GCN: {W1, W2}. APPNP MLP: {W1, b1, W2, b2} with biases
// stored as 1 x dim matrices.
struct Params {
  std::vector<DenseMatrix> blocks;
  std::vector<std::string> names;

  std::size_t total_elements() const;
};

Params init_params(const ModelConfig& cfg, std::uint64_t seed);  // Glorot uniform

// Cached activations for the hand-derived backward pass.
struct ForwardCache {
  DenseMatrix x_drop;
  DenseMatrix pre1;       // pre-ReLU first layer input
  DenseMatrix act1_drop;  // post-ReLU, post-dropout
  DenseMatrix drop_mask_x;   // scaled inverted-dropout masks (empty when eval)
  DenseMatrix drop_mask_act;
};

// dropout_seed absent => evaluation mode (no dropout, deterministic).
DenseMatrix gcn_forward(const SparseMatrix& prop, const DenseMatrix& x, const Params& p,
                        double dropout_rate = 0.0,
                        std::optional<std::uint64_t> dropout_seed = std::nullopt,
                        ForwardCache* cache = nullptr);

DenseMatrix appnp_forward(const SparseMatrix& prop, const DenseMatrix& x, const Params& p,
                          double beta, std::size_t k_steps, double dropout_rate = 0.0,
                          std::optional<std::uint64_t> dropout_seed = std::nullopt,
                          ForwardCache* cache = nullptr);

DenseMatrix model_forward(const ModelConfig& cfg, const SparseMatrix& prop, const DenseMatrix& x,
                          const Params& p, double dropout_rate = 0.0,
                          std::optional<std::uint64_t> dropout_seed = std::nullopt,
                          ForwardCache* cache = nullptr);

// Z = beta (I - (1-beta) prop)^{-1} H, by dense positive definite solve.
DenseMatrix ppnp_exact(const SparseMatrix& prop, const DenseMatrix& h, double beta);

struct LossResult {
  double loss = 0.0;
  DenseMatrix grad;  // w.r.t. logits
};

// Mean over masked rows of -log softmax(logits)[label]; row-max stabilized.
LossResult masked_cross_entropy(const DenseMatrix& logits, const std::vector<int>& labels,
                                const std::vector<std::size_t>& mask);

// Reverse-mode through the cached forward pass; includes weight_decay * W.
Params backward(const ModelConfig& cfg, const SparseMatrix& prop, const Params& p,
                const ForwardCache& cache, const DenseMatrix& loss_grad, double weight_decay);

struct AdamState {
  std::vector<DenseMatrix> m;
  std::vector<DenseMatrix> v;
  std::size_t t = 0;

  static AdamState like(const Params& p);
};

void adam_step(Params& params, const Params& grads, AdamState& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

struct TrainConfig {
  double learning_rate = 0.01;
  double weight_decay = 5e-4;
  std::size_t epochs = 200;
  std::size_t patience = 10;
  std::size_t hidden_dim = 64;
  double dropout_rate = 0.5;
  std::uint64_t seed = 0;
};

struct Metrics {
  std::vector<double> train_losses;
  std::vector<double> val_losses;
  std::size_t stop_epoch = 0;      // epoch of the returned (best-val) params
  double best_val_loss = 0.0;
  double test_accuracy = 0.0;      // filled by the pipeline
  double wall_time_sec = 0.0;
  std::size_t peak_tensor_elements = 0;  // n*d + n*h + parameter count
  std::size_t threads = 1;
};

struct TrainResult {
  Params params;
  Metrics metrics;
};

// Full-batch Adam with early stopping on validation loss; returns the
// parameters at the best validation loss. Throws on NaN loss.
TrainResult train(const ModelConfig& model, const SparseMatrix& prop, const DenseMatrix& x,
                  const std::vector<int>& train_labels, const std::vector<std::size_t>& train_mask,
                  const std::vector<int>& val_labels, const std::vector<std::size_t>& val_mask,
                  const TrainConfig& cfg);

std::vector<int> predict_labels(const DenseMatrix& logits);
double accuracy(const DenseMatrix& logits, const std::vector<int>& labels,
                const std::vector<std::size_t>& mask);

// Evaluation-mode forward on the original graph's propagation matrix.
double predict_full(const Graph& g, const DenseMatrix& x, const ModelConfig& model,
                    const Params& params, const std::vector<int>& labels,
                    const std::vector<std::size_t>& test_mask);

}  // namespace gcs
