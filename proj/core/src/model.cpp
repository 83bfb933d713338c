#include "simloss/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "simloss/metrics.hpp"
#include "simloss/rng.hpp"

namespace simloss {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEpsilon = 1e-8;

void check_layer_sizes(const std::vector<int>& layer_sizes) {
  if (layer_sizes.size() < 2) {
    throw std::invalid_argument("network needs at least input and output sizes");
  }
  for (const int size : layer_sizes) {
    if (size < 1) {
      throw std::invalid_argument("layer sizes must be positive");
    }
  }
}

void check_feature_width(const DenseNet& net, const Eigen::MatrixXd& features) {
  if (static_cast<int>(features.cols()) != net.input_dim()) {
    throw std::invalid_argument(
        "feature width " + std::to_string(features.cols()) +
        " does not match network input " + std::to_string(net.input_dim()));
  }
  if (features.rows() < 1) {
    throw std::invalid_argument("feature batch must be non-empty");
  }
}

/// Forward pass retaining activations, plus the loss gradients.
/// Shared by backward() and the training loop so the loss value comes for
/// free with the gradients.
NetParams batch_gradients(const DenseNet& net, const Eigen::MatrixXd& features,
                          const LabelBatch& labels,
                          const SimilarityMatrix& matrix, double* loss_out) {
  const int layers = net.layer_count();
  std::vector<Eigen::MatrixXd> activations;  // a_0 = input, ..., a_{L-1}
  activations.reserve(static_cast<std::size_t>(layers));
  activations.push_back(features);
  for (int l = 0; l < layers - 1; ++l) {
    Eigen::MatrixXd z =
        (activations.back() * net.params.weights[static_cast<std::size_t>(l)]
                                  .transpose())
            .rowwise() +
        net.params.biases[static_cast<std::size_t>(l)].transpose();
    activations.push_back(z.cwiseMax(0.0));
  }
  Eigen::MatrixXd logits =
      (activations.back() *
       net.params.weights[static_cast<std::size_t>(layers - 1)].transpose())
          .rowwise() +
      net.params.biases[static_cast<std::size_t>(layers - 1)].transpose();

  const LogitBatch logit_batch = LogitBatch::create(std::move(logits));
  if (loss_out != nullptr) {
    *loss_out = sim_loss(softmax(logit_batch), labels, matrix);
  }

  NetParams grads;
  grads.weights.resize(static_cast<std::size_t>(layers));
  grads.biases.resize(static_cast<std::size_t>(layers));

  Eigen::MatrixXd delta = sim_loss_grad_logits(logit_batch, labels, matrix);
  for (int l = layers - 1; l >= 0; --l) {
    const auto lu = static_cast<std::size_t>(l);
    grads.weights[lu] = delta.transpose() * activations[lu];
    grads.biases[lu] = delta.colwise().sum();
    if (l > 0) {
      // ReLU mask: the retained activation is positive iff the unit fired.
      delta = (delta * net.params.weights[lu]).array() *
              (activations[lu].array() > 0.0).cast<double>();
    }
  }
  return grads;
}

double validation_metric(const DenseNet& net, const Eigen::MatrixXd& features,
                         const std::vector<int>& targets,
                         EarlyStopMetric metric) {
  const ProbabilityBatch probs = softmax(forward(net, features));
  const std::vector<int> predictions = argmax_predictions(probs);
  return metric == EarlyStopMetric::validation_mae
             ? mae(predictions, targets)
             : accuracy(predictions, targets);
}

bool improves(double value, double best, EarlyStopMetric metric) {
  return metric == EarlyStopMetric::validation_mae ? value < best
                                                   : value > best;
}

}  // namespace

AdamState AdamState::zeros_like(const DenseNet& net) {
  AdamState state;
  for (const auto& w : net.params.weights) {
    state.first_moment.weights.push_back(
        Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    state.second_moment.weights.push_back(
        Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  }
  for (const auto& b : net.params.biases) {
    state.first_moment.biases.push_back(Eigen::VectorXd::Zero(b.size()));
    state.second_moment.biases.push_back(Eigen::VectorXd::Zero(b.size()));
  }
  return state;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("learning_rate must be positive");
  }
  if (batch_size < 1) {
    throw std::invalid_argument("batch_size must be >= 1");
  }
  if (patience < 1 || max_epochs < 1 || patience > max_epochs) {
    throw std::invalid_argument(
        "need 1 <= patience <= max_epochs and max_epochs >= 1");
  }
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& features) {
  Standardizer s;
  s.mean = features.colwise().mean();
  const Eigen::ArrayXd var =
      (features.rowwise() - s.mean.transpose()).array().square().colwise().sum() /
      static_cast<double>(features.rows());
  s.scale = var.sqrt().matrix();
  for (Eigen::Index j = 0; j < s.scale.size(); ++j) {
    if (s.scale(j) < 1e-12) {
      s.scale(j) = 1.0;
    }
  }
  return s;
}

Eigen::MatrixXd Standardizer::transform(const Eigen::MatrixXd& features) const {
  if (features.cols() != mean.size()) {
    throw std::invalid_argument("standardizer dimension mismatch");
  }
  return ((features.rowwise() - mean.transpose()).array().rowwise() /
          scale.transpose().array())
      .matrix();
}

DenseNet init_network(const std::vector<int>& layer_sizes, std::uint64_t seed) {
  check_layer_sizes(layer_sizes);
  rng::Xoshiro256StarStar gen(seed);
  DenseNet net;
  net.layer_sizes = layer_sizes;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        w(i, j) = bound * (2.0 * gen.uniform() - 1.0);
      }
    }
    net.params.weights.push_back(std::move(w));
    net.params.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return net;
}

LogitBatch forward(const DenseNet& net, const Eigen::MatrixXd& features) {
  check_feature_width(net, features);
  Eigen::MatrixXd a = features;
  const int layers = net.layer_count();
  for (int l = 0; l < layers; ++l) {
    const auto lu = static_cast<std::size_t>(l);
    a = (a * net.params.weights[lu].transpose()).rowwise() +
        net.params.biases[lu].transpose();
    if (l < layers - 1) {
      a = a.cwiseMax(0.0);
    }
  }
  return LogitBatch::create(std::move(a));
}

NetParams backward(const DenseNet& net, const Eigen::MatrixXd& features,
                   const LabelBatch& labels, const SimilarityMatrix& matrix) {
  check_feature_width(net, features);
  return batch_gradients(net, features, labels, matrix, nullptr);
}

void adam_step(DenseNet& net, const NetParams& grads, AdamState& state,
               double learning_rate) {
  if (grads.weights.size() != net.params.weights.size() ||
      grads.biases.size() != net.params.biases.size()) {
    throw std::invalid_argument("gradient shape does not match network");
  }
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(kAdamBeta1, t);
  const double correction2 = 1.0 - std::pow(kAdamBeta2, t);

  const auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    if (param.rows() != grad.rows() || param.cols() != grad.cols()) {
      throw std::invalid_argument("gradient shape does not match network");
    }
    m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * grad;
    v = (kAdamBeta2 * v.array() + (1.0 - kAdamBeta2) * grad.array().square())
            .matrix();
    param.array() -= learning_rate * (m.array() / correction1) /
                     ((v.array() / correction2).sqrt() + kAdamEpsilon);
  };

  for (std::size_t l = 0; l < net.params.weights.size(); ++l) {
    update(net.params.weights[l], grads.weights[l], state.first_moment.weights[l],
           state.second_moment.weights[l]);
    update(net.params.biases[l], grads.biases[l], state.first_moment.biases[l],
           state.second_moment.biases[l]);
  }
}

TrainResult train(const DatasetSplits& splits, const SimilarityMatrix& matrix,
                  const std::vector<int>& layer_sizes,
                  const TrainConfig& config) {
  config.validate();
  check_layer_sizes(layer_sizes);
  const Dataset& train_set = splits.train;
  if (train_set.size() < 1 || splits.val.size() < 1) {
    throw std::invalid_argument("train and validation splits must be non-empty");
  }
  if (splits.val.feature_dim() != train_set.feature_dim() ||
      splits.test.feature_dim() != train_set.feature_dim()) {
    throw std::invalid_argument("splits disagree on feature width");
  }
  if (train_set.class_count != matrix.class_count()) {
    throw std::invalid_argument("dataset class count does not match matrix");
  }
  if (layer_sizes.front() != train_set.feature_dim() ||
      layer_sizes.back() != train_set.class_count) {
    throw std::invalid_argument(
        "layer_sizes must run from feature width to class count");
  }

  const Standardizer scaler = Standardizer::fit(train_set.features);
  const Eigen::MatrixXd x_train = scaler.transform(train_set.features);
  const Eigen::MatrixXd x_val = scaler.transform(splits.val.features);

  DenseNet net = init_network(layer_sizes, rng::mix_seed(config.seed, 0));
  AdamState adam = AdamState::zeros_like(net);
  const std::uint64_t shuffle_root = rng::mix_seed(config.seed, 1);

  const int n_train = train_set.size();
  TrainHistory history;
  NetParams best_params = net.params;
  double best_metric = 0.0;
  int non_improving = 0;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    rng::Xoshiro256StarStar shuffle_gen(
        rng::mix_seed(shuffle_root, static_cast<std::uint64_t>(epoch)));
    const std::vector<int> order = rng::permutation(n_train, shuffle_gen);

    double loss_sum = 0.0;
    for (int begin = 0; begin < n_train; begin += config.batch_size) {
      const int count = std::min(config.batch_size, n_train - begin);
      Eigen::MatrixXd x_batch(count, train_set.feature_dim());
      std::vector<int> y_batch(static_cast<std::size_t>(count));
      for (int i = 0; i < count; ++i) {
        const int src = order[static_cast<std::size_t>(begin + i)];
        x_batch.row(i) = x_train.row(src);
        y_batch[static_cast<std::size_t>(i)] =
            train_set.labels[static_cast<std::size_t>(src)];
      }
      const LabelBatch labels =
          LabelBatch::create(std::move(y_batch), train_set.class_count);
      double batch_loss = 0.0;
      const NetParams grads =
          batch_gradients(net, x_batch, labels, matrix, &batch_loss);
      adam_step(net, grads, adam, config.learning_rate);
      loss_sum += batch_loss * count;
    }
    history.train_loss.push_back(loss_sum / n_train);

    const double metric = validation_metric(net, x_val, splits.val.labels,
                                            config.early_stop_metric);
    history.val_metric.push_back(metric);

    if (epoch == 0 || improves(metric, best_metric, config.early_stop_metric)) {
      best_metric = metric;
      history.best_epoch = epoch;
      best_params = net.params;
      non_improving = 0;
    } else {
      ++non_improving;
      if (non_improving >= config.patience) {
        break;
      }
    }
  }

  history.best_val_metric = best_metric;
  net.params = std::move(best_params);
  return TrainResult{TrainedModel{std::move(net), scaler}, std::move(history)};
}

}  // namespace simloss
