#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "simloss/data.hpp"
#include "simloss/loss.hpp"
#include "simloss/similarity.hpp"

namespace simloss {

/// Weights and biases per layer; also the shape of parameter gradients and
/// optimizer moments.
struct NetParams {
  std::vector<Eigen::MatrixXd> weights;  // layer l: (sizes[l+1] x sizes[l])
  std::vector<Eigen::VectorXd> biases;   // layer l: sizes[l+1]
};

/// Fully connected network: affine + ReLU on hidden layers, affine only on
/// the output layer (logits).
struct DenseNet {
  std::vector<int> layer_sizes;  // [d_in, h_1, ..., h_k, C]
  NetParams params;

  int input_dim() const { return layer_sizes.front(); }
  int class_count() const { return layer_sizes.back(); }
  int layer_count() const { return static_cast<int>(params.weights.size()); }
};

struct AdamState {
  NetParams first_moment;
  NetParams second_moment;
  long step_count = 0;

  static AdamState zeros_like(const DenseNet& net);
};

enum class EarlyStopMetric { validation_mae, validation_accuracy };

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 128;
  int patience = 10;
  int max_epochs = 100;
  EarlyStopMetric early_stop_metric = EarlyStopMetric::validation_mae;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Per-feature affine transform fitted on the training split (zero mean,
/// unit variance; constant features keep scale 1) and applied identically
/// to every split and to any features evaluated later.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& features);
  Eigen::MatrixXd transform(const Eigen::MatrixXd& features) const;
};

struct TrainedModel {
  DenseNet net;
  Standardizer scaler;
};

struct TrainHistory {
  std::vector<double> train_loss;  // per epoch, mean of minibatch losses
  std::vector<double> val_metric;  // per epoch, the early-stop metric
  int best_epoch = 0;              // index into val_metric
  double best_val_metric = 0.0;
};

struct TrainResult {
  TrainedModel model;
  TrainHistory history;
};

/// Weights drawn uniformly from [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases
/// zero; bitwise deterministic given the seed.
DenseNet init_network(const std::vector<int>& layer_sizes, std::uint64_t seed);

/// Forward pass on already-standardized features.
LogitBatch forward(const DenseNet& net, const Eigen::MatrixXd& features);

/// Exact gradients of sim_loss(softmax(forward(net, x)), labels, matrix)
/// with respect to every weight and bias.
NetParams backward(const DenseNet& net, const Eigen::MatrixXd& features,
                   const LabelBatch& labels, const SimilarityMatrix& matrix);

/// Standard Adam update (beta1 = 0.9, beta2 = 0.999, eps = 1e-8,
/// bias-corrected moments); increments state.step_count.
void adam_step(DenseNet& net, const NetParams& grads, AdamState& state,
               double learning_rate);

/// Mini-batch training with per-epoch reshuffling, early stopping on the
/// configured validation metric ("improvement" means strictly better than
/// the best seen; ties do not count), and best-epoch weight restore. The
/// final partial batch is kept; the loss normalizes by the actual batch
/// size. Deterministic given (splits, matrix, layer_sizes, config).
TrainResult train(const DatasetSplits& splits, const SimilarityMatrix& matrix,
                  const std::vector<int>& layer_sizes,
                  const TrainConfig& config);

}  // namespace simloss
