#pragma once

#include <Eigen/Core>

#include <optional>
#include <vector>

#include "simloss/data.hpp"
#include "simloss/loss.hpp"
#include "simloss/model.hpp"

namespace simloss {

/// Argmax per row; ties break toward the lowest class index. MAE/MSE
/// comparisons depend on this rule, so it is fixed here rather than left to
/// the caller.
std::vector<int> argmax_predictions(const ProbabilityBatch& probs);

/// Fraction of exact matches.
double accuracy(const std::vector<int>& predictions,
                const std::vector<int>& targets);

/// Mean absolute / squared difference of class indices, treating them as
/// ordinal values.
double mae(const std::vector<int>& predictions,
           const std::vector<int>& targets);
double mse(const std::vector<int>& predictions,
           const std::vector<int>& targets);

/// Fraction of examples whose prediction lands in the target's superclass;
/// at least as high as accuracy on the same inputs.
double superclass_accuracy(const std::vector<int>& predictions,
                           const std::vector<int>& targets,
                           const SuperclassMap& map);

/// Among misclassified examples, the fraction whose prediction still lands
/// in the target's superclass. Undefined (nullopt) when every prediction is
/// correct; that is a distinct signal, not 0.
std::optional<double> failed_superclass_accuracy(
    const std::vector<int>& predictions, const std::vector<int>& targets,
    const SuperclassMap& map);

/// Per-seed metric values of two systems, paired by index.
struct PairedSamples {
  std::vector<double> a;
  std::vector<double> b;
};

enum class Direction { a_better, b_better, none };

struct WilcoxonResult {
  double p_value = 1.0;
  bool significant = false;
  Direction direction = Direction::none;
};

/// Two-sided Wilcoxon signed-rank test on the paired differences a - b.
/// Zero differences are dropped; tied absolute differences get average
/// ranks. With at most 20 nonzero differences the p-value comes from the
/// exact distribution over all 2^n sign assignments, otherwise from the
/// normal approximation with tie correction. Returns nullopt when no
/// nonzero difference remains (no test possible). The direction reports
/// the sign of the mean difference; callers map it onto the metric's
/// orientation.
std::optional<WilcoxonResult> wilcoxon_signed_rank(const PairedSamples& samples,
                                                   double alpha = 0.05);

/// Arithmetic mean of the softmax outputs over all examples, or over the
/// examples of one target class. Sums to 1 within 1e-9.
Eigen::VectorXd mean_output_distribution(const TrainedModel& model,
                                         const Eigen::MatrixXd& features);
Eigen::VectorXd mean_output_distribution(const TrainedModel& model,
                                         const Eigen::MatrixXd& features,
                                         const std::vector<int>& targets,
                                         int target_class);

/// Number of strict local maxima above `threshold`: interior indices beat
/// both neighbors, boundary indices beat their single neighbor. Quantifies
/// how many representative classes a mean output distribution has.
int representative_class_count(const Eigen::VectorXd& distribution,
                               double threshold = 0.01);

}  // namespace simloss
