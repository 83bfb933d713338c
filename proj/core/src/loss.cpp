#include "simloss/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace simloss {

namespace {

void check_shapes(int batch_probs, int classes_probs, const LabelBatch& labels,
                  int classes_matrix) {
  if (labels.size() != batch_probs) {
    throw std::invalid_argument(
        "batch size mismatch: " + std::to_string(batch_probs) +
        " probability rows vs " + std::to_string(labels.size()) + " labels");
  }
  if (classes_probs != classes_matrix) {
    throw std::invalid_argument(
        "class count mismatch: " + std::to_string(classes_probs) +
        " probability columns vs " + std::to_string(classes_matrix) +
        " matrix classes");
  }
  if (labels.class_count != classes_matrix) {
    throw std::invalid_argument(
        "class count mismatch: labels allow " +
        std::to_string(labels.class_count) + " classes, matrix has " +
        std::to_string(classes_matrix));
  }
  if (batch_probs < 1) {
    throw std::invalid_argument("batch must contain at least one example");
  }
}

/// Core of sim_loss / prob_loss; `weights` is any nonnegative matrix whose
/// row y weights the probabilities of examples labeled y.
double weighted_nll(const Eigen::MatrixXd& probs,
                    const std::vector<int>& targets,
                    const Eigen::MatrixXd& weights) {
  const auto n = probs.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = targets[static_cast<std::size_t>(i)];
    const double weighted_sum = weights.row(y).dot(probs.row(i));
    total += std::log(std::max(weighted_sum, kLogClampEpsilon));
  }
  return -total / static_cast<double>(n);
}

}  // namespace

LogitBatch LogitBatch::create(Eigen::MatrixXd values) {
  if (values.rows() < 1 || values.cols() < 1) {
    throw std::invalid_argument("logit batch must be non-empty");
  }
  if (!values.allFinite()) {
    throw std::invalid_argument("logit batch has non-finite entries");
  }
  return LogitBatch{std::move(values)};
}

ProbabilityBatch ProbabilityBatch::create(Eigen::MatrixXd values) {
  if (values.rows() < 1 || values.cols() < 1) {
    throw std::invalid_argument("probability batch must be non-empty");
  }
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      const double v = values(i, c);
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument("probability batch entry at row " +
                                    std::to_string(i) + " is negative or NaN");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw std::invalid_argument("probability batch row " + std::to_string(i) +
                                  " sums to " + std::to_string(sum) +
                                  ", expected 1");
    }
  }
  return ProbabilityBatch{std::move(values)};
}

LabelBatch LabelBatch::create(std::vector<int> targets, int class_count) {
  if (class_count < 2) {
    throw std::invalid_argument("labels need class_count >= 2");
  }
  if (targets.empty()) {
    throw std::invalid_argument("label batch must be non-empty");
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0 || targets[i] >= class_count) {
      throw std::invalid_argument("label " + std::to_string(targets[i]) +
                                  " at index " + std::to_string(i) +
                                  " is outside [0, " +
                                  std::to_string(class_count) + ")");
    }
  }
  return LabelBatch{std::move(targets), class_count};
}

ProbabilityBatch softmax(const LogitBatch& logits) {
  Eigen::MatrixXd out = logits.values;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double row_max = out.row(i).maxCoeff();
    out.row(i) = (out.row(i).array() - row_max).exp();
    out.row(i) /= out.row(i).sum();
  }
  return ProbabilityBatch{std::move(out)};
}

double sim_loss(const ProbabilityBatch& probs, const LabelBatch& labels,
                const SimilarityMatrix& matrix) {
  check_shapes(probs.size(), probs.class_count(), labels,
               matrix.class_count());
  return weighted_nll(probs.values, labels.targets, matrix.values());
}

Eigen::MatrixXd sim_loss_grad_probs(const ProbabilityBatch& probs,
                                    const LabelBatch& labels,
                                    const SimilarityMatrix& matrix) {
  check_shapes(probs.size(), probs.class_count(), labels,
               matrix.class_count());
  const auto n = probs.values.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::MatrixXd grad(n, probs.values.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = labels.targets[static_cast<std::size_t>(i)];
    const double weighted_sum = matrix.values().row(y).dot(probs.values.row(i));
    if (weighted_sum < kLogClampEpsilon) {
      grad.row(i).setZero();
    } else {
      grad.row(i) = -inv_n / weighted_sum * matrix.values().row(y);
    }
  }
  return grad;
}

Eigen::MatrixXd sim_loss_grad_logits(const LogitBatch& logits,
                                     const LabelBatch& labels,
                                     const SimilarityMatrix& matrix) {
  check_shapes(logits.size(), logits.class_count(), labels,
               matrix.class_count());
  const ProbabilityBatch probs = softmax(logits);
  const auto n = probs.values.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::MatrixXd grad(n, probs.values.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = labels.targets[static_cast<std::size_t>(i)];
    const double weighted_sum = matrix.values().row(y).dot(probs.values.row(i));
    if (weighted_sum < kLogClampEpsilon) {
      grad.row(i).setZero();
    } else {
      grad.row(i) =
          inv_n * probs.values.row(i).array() *
          (1.0 - matrix.values().row(y).array() / weighted_sum);
    }
  }
  return grad;
}

double prob_loss(const ProbabilityBatch& probs, const LabelBatch& labels,
                 const SimilarityMatrix& matrix) {
  check_shapes(probs.size(), probs.class_count(), labels,
               matrix.class_count());
  return weighted_nll(probs.values, labels.targets, row_normalize(matrix));
}

double loss_gap(const LabelBatch& labels, const SimilarityMatrix& matrix) {
  if (labels.class_count != matrix.class_count()) {
    throw std::invalid_argument(
        "class count mismatch between labels and matrix");
  }
  const Eigen::VectorXd row_sums = matrix.values().rowwise().sum();
  double total = 0.0;
  for (const int y : labels.targets) {
    total += std::log(row_sums(y));
  }
  return total / static_cast<double>(labels.size());
}

}  // namespace simloss
