#pragma once

#include <Eigen/Core>

#include <vector>

#include "simloss/similarity.hpp"

namespace simloss {

/// Pre-softmax class scores, one row per example. All entries finite.
struct LogitBatch {
  Eigen::MatrixXd values;

  static LogitBatch create(Eigen::MatrixXd values);
  int size() const { return static_cast<int>(values.rows()); }
  int class_count() const { return static_cast<int>(values.cols()); }
};

/// Per-example class distributions: entries nonnegative, each row summing
/// to 1 within 1e-9.
struct ProbabilityBatch {
  Eigen::MatrixXd values;

  static ProbabilityBatch create(Eigen::MatrixXd values);
  int size() const { return static_cast<int>(values.rows()); }
  int class_count() const { return static_cast<int>(values.cols()); }
};

/// Integer target classes, each in [0, class_count).
struct LabelBatch {
  std::vector<int> targets;
  int class_count = 0;

  static LabelBatch create(std::vector<int> targets, int class_count);
  int size() const { return static_cast<int>(targets.size()); }
};

/// The weighted sum inside the log is clamped below at this value. It can
/// reach exactly 0 when all probability mass sits on classes with zero
/// similarity to the target; the clamp bounds the loss at -log(1e-12) and
/// keeps gradients finite. Inside the clamped region the loss is constant,
/// so its gradient there is zero.
inline constexpr double kLogClampEpsilon = 1e-12;

/// Row-wise softmax with max subtraction; rows of the result sum to 1
/// within 1e-12 and large logits do not overflow.
ProbabilityBatch softmax(const LogitBatch& logits);

/// Similarity-weighted cross entropy:
///   -(1/N) sum_i log( sum_c S[y_i, c] * p_i[c] ).
/// With the identity matrix this is exactly categorical cross entropy.
/// Always >= 0 since the weighted sum never exceeds 1.
double sim_loss(const ProbabilityBatch& probs, const LabelBatch& labels,
                const SimilarityMatrix& matrix);

/// Partial derivatives of sim_loss with respect to the probabilities:
/// entry (i, c) = -(1/N) * S[y_i, c] / sum_c' S[y_i, c'] * p_i[c'].
Eigen::MatrixXd sim_loss_grad_probs(const ProbabilityBatch& probs,
                                    const LabelBatch& labels,
                                    const SimilarityMatrix& matrix);

/// Gradient of sim_loss(softmax(z)) with respect to the logits z:
/// entry (i, k) = (1/N) * p_k * (1 - S[y_i, k] / sum_c S[y_i, c] * p_c).
/// With the identity matrix this reduces to (p - onehot(y)) / N.
Eigen::MatrixXd sim_loss_grad_logits(const LogitBatch& logits,
                                     const LabelBatch& labels,
                                     const SimilarityMatrix& matrix);

/// The probability-matrix variant: sim_loss evaluated with the row
/// normalization of `matrix`. Differs from sim_loss by loss_gap(labels,
/// matrix), a probability-independent constant, and shares its gradients.
double prob_loss(const ProbabilityBatch& probs, const LabelBatch& labels,
                 const SimilarityMatrix& matrix);

/// The probability-independent offset between prob_loss and sim_loss:
/// (1/N) sum_i log( sum_c' S[y_i, c'] ).
double loss_gap(const LabelBatch& labels, const SimilarityMatrix& matrix);

}  // namespace simloss
