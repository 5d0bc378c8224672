#include "gcs/nn.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "gcs/kernels.hpp"

namespace gcs {

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "gcn") return ModelKind::kGcn;
  if (name == "appnp") return ModelKind::kAppnp;
  throw std::invalid_argument("unknown model: " + name);
}

std::string to_string(ModelKind kind) {
  return kind == ModelKind::kGcn ? "gcn" : "appnp";
}

std::size_t Params::total_elements() const {
  std::size_t total = 0;
  for (const auto& b : blocks) total += b.size();
  return total;
}

namespace {

DenseMatrix glorot(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double s = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-s, s);
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

// Scaled inverted-dropout mask: entries are 0 or 1/keep.
DenseMatrix dropout_mask(std::size_t rows, std::size_t cols, double rate, std::mt19937_64& rng) {
  DenseMatrix m(rows, cols);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  const double inv_keep = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < m.size(); ++i) {
    m.data()[i] = dist(rng) < rate ? 0.0 : inv_keep;
  }
  return m;
}

DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) c.data()[i] = a.data()[i] * b.data()[i];
  return c;
}

void add_row_bias(DenseMatrix& m, const DenseMatrix& bias) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    kernels::active().axpy(1.0, bias.data(), m.row(i), m.cols());
  }
}

DenseMatrix column_sums(const DenseMatrix& m) {
  DenseMatrix s(1, m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    kernels::active().axpy(1.0, m.row(i), s.data(), m.cols());
  }
  return s;
}

DenseMatrix relu(const DenseMatrix& x) {
  DenseMatrix y(x.rows(), x.cols());
  kernels::active().relu(x.data(), y.data(), x.size());
  return y;
}

}  // namespace

Params init_params(const ModelConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Params p;
  if (cfg.kind == ModelKind::kGcn) {
    p.blocks = {glorot(cfg.in_dim, cfg.hidden_dim, rng), glorot(cfg.hidden_dim, cfg.out_dim, rng)};
    p.names = {"W1", "W2"};
  } else {
    p.blocks = {glorot(cfg.in_dim, cfg.hidden_dim, rng), DenseMatrix(1, cfg.hidden_dim),
                glorot(cfg.hidden_dim, cfg.out_dim, rng), DenseMatrix(1, cfg.out_dim)};
    p.names = {"W1", "b1", "W2", "b2"};
  }
  return p;
}

DenseMatrix gcn_forward(const SparseMatrix& prop, const DenseMatrix& x, const Params& p,
                        double dropout_rate, std::optional<std::uint64_t> dropout_seed,
                        ForwardCache* cache) {
  if (p.blocks.size() != 2) throw std::invalid_argument("gcn_forward: expected 2 blocks");
  const bool training = dropout_seed.has_value() && dropout_rate > 0.0;
  std::mt19937_64 rng(dropout_seed.value_or(0));

  DenseMatrix x_used = x;
  DenseMatrix mask_x, mask_act;
  if (training) {
    mask_x = dropout_mask(x.rows(), x.cols(), dropout_rate, rng);
    x_used = hadamard(x, mask_x);
  }
  DenseMatrix pre1 = prop.multiply(matmul(x_used, p.blocks[0]));
  DenseMatrix act1 = relu(pre1);
  if (training) {
    mask_act = dropout_mask(act1.rows(), act1.cols(), dropout_rate, rng);
    act1 = hadamard(act1, mask_act);
  }
  DenseMatrix logits = prop.multiply(matmul(act1, p.blocks[1]));
  if (cache != nullptr) {
    cache->x_drop = std::move(x_used);
    cache->pre1 = std::move(pre1);
    cache->act1_drop = std::move(act1);
    cache->drop_mask_x = std::move(mask_x);
    cache->drop_mask_act = std::move(mask_act);
  }
  return logits;
}

DenseMatrix appnp_forward(const SparseMatrix& prop, const DenseMatrix& x, const Params& p,
                          double beta, std::size_t k_steps, double dropout_rate,
                          std::optional<std::uint64_t> dropout_seed, ForwardCache* cache) {
  if (p.blocks.size() != 4) throw std::invalid_argument("appnp_forward: expected 4 blocks");
  if (beta <= 0.0 || beta > 1.0) throw std::invalid_argument("appnp_forward: beta in (0,1]");
  const bool training = dropout_seed.has_value() && dropout_rate > 0.0;
  std::mt19937_64 rng(dropout_seed.value_or(0));

  DenseMatrix x_used = x;
  DenseMatrix mask_x, mask_act;
  if (training) {
    mask_x = dropout_mask(x.rows(), x.cols(), dropout_rate, rng);
    x_used = hadamard(x, mask_x);
  }
  DenseMatrix pre1 = matmul(x_used, p.blocks[0]);
  add_row_bias(pre1, p.blocks[1]);
  DenseMatrix act1 = relu(pre1);
  if (training) {
    mask_act = dropout_mask(act1.rows(), act1.cols(), dropout_rate, rng);
    act1 = hadamard(act1, mask_act);
  }
  DenseMatrix h = matmul(act1, p.blocks[2]);
  add_row_bias(h, p.blocks[3]);

  DenseMatrix z = h;
  for (std::size_t step = 0; step < k_steps; ++step) {
    DenseMatrix pz = prop.multiply(z);
    for (std::size_t i = 0; i < z.size(); ++i) {
      z.data()[i] = (1.0 - beta) * pz.data()[i] + beta * h.data()[i];
    }
  }
  if (cache != nullptr) {
    cache->x_drop = std::move(x_used);
    cache->pre1 = std::move(pre1);
    cache->act1_drop = std::move(act1);
    cache->drop_mask_x = std::move(mask_x);
    cache->drop_mask_act = std::move(mask_act);
  }
  return z;
}

DenseMatrix model_forward(const ModelConfig& cfg, const SparseMatrix& prop, const DenseMatrix& x,
                          const Params& p, double dropout_rate,
                          std::optional<std::uint64_t> dropout_seed, ForwardCache* cache) {
  if (cfg.kind == ModelKind::kGcn) {
    return gcn_forward(prop, x, p, dropout_rate, dropout_seed, cache);
  }
  return appnp_forward(prop, x, p, cfg.beta, cfg.k_steps, dropout_rate, dropout_seed, cache);
}

DenseMatrix ppnp_exact(const SparseMatrix& prop, const DenseMatrix& h, double beta) {
  if (beta <= 0.0 || beta > 1.0) throw std::invalid_argument("ppnp_exact: beta in (0,1]");
  const std::size_t n = prop.size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                                static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = prop.row_ptr()[i]; p < prop.row_ptr()[i + 1]; ++p) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(prop.col()[p])) -=
          (1.0 - beta) * prop.val()[p];
    }
  }
  Eigen::MatrixXd rhs(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(h.cols()));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < h.cols(); ++j) {
      rhs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = beta * h(i, j);
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw std::runtime_error("ppnp_exact: solver breakdown");
  Eigen::MatrixXd sol = llt.solve(rhs);
  DenseMatrix z(n, h.cols());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < h.cols(); ++j) {
      z(i, j) = sol(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return z;
}

LossResult masked_cross_entropy(const DenseMatrix& logits, const std::vector<int>& labels,
                                const std::vector<std::size_t>& mask) {
  if (mask.empty()) throw std::invalid_argument("masked_cross_entropy: empty mask");
  LossResult result;
  result.grad = DenseMatrix(logits.rows(), logits.cols());
  const double inv = 1.0 / static_cast<double>(mask.size());
  for (std::size_t row : mask) {
    const int label = labels[row];
    if (label < 0 || static_cast<std::size_t>(label) >= logits.cols()) {
      throw std::invalid_argument("masked_cross_entropy: masked row has no valid label");
    }
    double row_max = logits(row, 0);
    for (std::size_t j = 1; j < logits.cols(); ++j) row_max = std::max(row_max, logits(row, j));
    double denom = 0.0;
    for (std::size_t j = 0; j < logits.cols(); ++j) denom += std::exp(logits(row, j) - row_max);
    const double log_denom = std::log(denom);
    result.loss += (log_denom - (logits(row, static_cast<std::size_t>(label)) - row_max)) * inv;
    for (std::size_t j = 0; j < logits.cols(); ++j) {
      double softmax = std::exp(logits(row, j) - row_max) / denom;
      if (j == static_cast<std::size_t>(label)) softmax -= 1.0;
      result.grad(row, j) = softmax * inv;
    }
  }
  return result;
}

Params backward(const ModelConfig& cfg, const SparseMatrix& prop, const Params& p,
                const ForwardCache& cache, const DenseMatrix& loss_grad, double weight_decay) {
  Params grads;
  grads.names = p.names;
  const auto& ops = kernels::active();

  if (cfg.kind == ModelKind::kGcn) {
    const DenseMatrix d_z2 = prop.multiply(loss_grad);      // prop is symmetric
    DenseMatrix g_w2 = matmul_tn(cache.act1_drop, d_z2);
    DenseMatrix d_act1 = matmul_nt(d_z2, p.blocks[1]);
    if (cache.drop_mask_act.size() > 0) d_act1 = hadamard(d_act1, cache.drop_mask_act);
    DenseMatrix d_pre1(d_act1.rows(), d_act1.cols());
    ops.relu_backward(cache.pre1.data(), d_act1.data(), d_pre1.data(), d_pre1.size());
    const DenseMatrix d_z1 = prop.multiply(d_pre1);
    DenseMatrix g_w1 = matmul_tn(cache.x_drop, d_z1);
    grads.blocks = {std::move(g_w1), std::move(g_w2)};
  } else {
    // Reverse of Z <- (1-beta) P Z + beta H, K times, starting from Z = H.
    DenseMatrix g = loss_grad;
    DenseMatrix d_h(loss_grad.rows(), loss_grad.cols());
    for (std::size_t step = 0; step < cfg.k_steps; ++step) {
      add_in_place(d_h, g, cfg.beta);
      DenseMatrix pg = prop.multiply(g);
      kernels::active().scale(1.0 - cfg.beta, pg.data(), pg.size());
      g = std::move(pg);
    }
    add_in_place(d_h, g);

    DenseMatrix g_b2 = column_sums(d_h);
    DenseMatrix g_w2 = matmul_tn(cache.act1_drop, d_h);
    DenseMatrix d_act1 = matmul_nt(d_h, p.blocks[2]);
    if (cache.drop_mask_act.size() > 0) d_act1 = hadamard(d_act1, cache.drop_mask_act);
    DenseMatrix d_pre1(d_act1.rows(), d_act1.cols());
    ops.relu_backward(cache.pre1.data(), d_act1.data(), d_pre1.data(), d_pre1.size());
    DenseMatrix g_b1 = column_sums(d_pre1);
    DenseMatrix g_w1 = matmul_tn(cache.x_drop, d_pre1);
    grads.blocks = {std::move(g_w1), std::move(g_b1), std::move(g_w2), std::move(g_b2)};
  }

  if (weight_decay != 0.0) {
    for (std::size_t b = 0; b < grads.blocks.size(); ++b) {
      ops.axpy(weight_decay, p.blocks[b].data(), grads.blocks[b].data(), grads.blocks[b].size());
    }
  }
  return grads;
}

AdamState AdamState::like(const Params& p) {
  AdamState s;
  for (const auto& b : p.blocks) {
    s.m.emplace_back(b.rows(), b.cols());
    s.v.emplace_back(b.rows(), b.cols());
  }
  return s;
}

void adam_step(Params& params, const Params& grads, AdamState& state, double lr,
               double beta1, double beta2, double eps) {
  ++state.t;
  const double b1t = std::pow(beta1, static_cast<double>(state.t));
  const double b2t = std::pow(beta2, static_cast<double>(state.t));
  for (std::size_t b = 0; b < params.blocks.size(); ++b) {
    kernels::active().adam_update(params.blocks[b].data(), state.m[b].data(), state.v[b].data(),
                                  grads.blocks[b].data(), params.blocks[b].size(), lr, beta1,
                                  beta2, eps, b1t, b2t);
  }
}

TrainResult train(const ModelConfig& model, const SparseMatrix& prop, const DenseMatrix& x,
                  const std::vector<int>& train_labels, const std::vector<std::size_t>& train_mask,
                  const std::vector<int>& val_labels, const std::vector<std::size_t>& val_mask,
                  const TrainConfig& cfg) {
  if (train_mask.empty() || val_mask.empty()) {
    throw std::invalid_argument("train: empty train or val mask");
  }
  const auto start = std::chrono::steady_clock::now();

  ModelConfig m = model;
  m.in_dim = x.cols();
  m.hidden_dim = cfg.hidden_dim;

  Params params = init_params(m, cfg.seed);
  AdamState state = AdamState::like(params);

  TrainResult result;
  result.metrics.peak_tensor_elements =
      x.rows() * x.cols() + x.rows() * m.hidden_dim + params.total_elements();

  Params best = params;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  std::size_t since_best = 0;
  std::mt19937_64 epoch_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    ForwardCache cache;
    const std::uint64_t drop_seed = epoch_rng();
    DenseMatrix logits = model_forward(m, prop, x, params, cfg.dropout_rate, drop_seed, &cache);
    LossResult loss = masked_cross_entropy(logits, train_labels, train_mask);
    if (!std::isfinite(loss.loss)) {
      throw std::runtime_error("train: loss diverged (NaN/inf) at epoch " + std::to_string(epoch));
    }
    Params grads = backward(m, prop, params, cache, loss.grad, cfg.weight_decay);
    adam_step(params, grads, state, cfg.learning_rate);

    DenseMatrix eval_logits = model_forward(m, prop, x, params);
    const double val_loss = masked_cross_entropy(eval_logits, val_labels, val_mask).loss;
    result.metrics.train_losses.push_back(loss.loss);
    result.metrics.val_losses.push_back(val_loss);

    if (val_loss < best_val) {
      best_val = val_loss;
      best = params;
      best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
      if (since_best > cfg.patience) break;
    }
  }

  result.params = std::move(best);
  result.metrics.stop_epoch = best_epoch;
  result.metrics.best_val_loss = best_val;
  result.metrics.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<int> predict_labels(const DenseMatrix& logits) {
  std::vector<int> out(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < logits.cols(); ++j) {
      if (logits(i, j) > logits(i, best)) best = j;
    }
    out[i] = static_cast<int>(best);
  }
  return out;
}

double accuracy(const DenseMatrix& logits, const std::vector<int>& labels,
                const std::vector<std::size_t>& mask) {
  if (mask.empty()) throw std::invalid_argument("accuracy: empty mask");
  const std::vector<int> pred = predict_labels(logits);
  std::size_t correct = 0;
  for (std::size_t v : mask) {
    if (pred[v] == labels[v]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(mask.size());
}

double predict_full(const Graph& g, const DenseMatrix& x, const ModelConfig& model,
                    const Params& params, const std::vector<int>& labels,
                    const std::vector<std::size_t>& test_mask) {
  const SparseMatrix prop = normalized_adjacency_selfloops(g);
  const DenseMatrix logits = model_forward(model, prop, x, params);
  return accuracy(logits, labels, test_mask);
}

}  // namespace gcs
