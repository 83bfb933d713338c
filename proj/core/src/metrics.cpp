#include "simloss/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace simloss {

namespace {

void check_pair(const std::vector<int>& predictions,
                const std::vector<int>& targets) {
  if (predictions.empty() || targets.empty()) {
    throw std::invalid_argument("metric input must be non-empty");
  }
  if (predictions.size() != targets.size()) {
    throw std::invalid_argument(
        "metric inputs differ in length: " + std::to_string(predictions.size()) +
        " vs " + std::to_string(targets.size()));
  }
}

struct RankedDifferences {
  std::vector<double> ranks;   // rank of |d_i|, average ranks on ties
  std::vector<int> signs;      // +1 / -1
  std::vector<int> tie_sizes;  // sizes of tie groups among |d|
  double w_plus = 0.0;
  double mean_difference = 0.0;
};

RankedDifferences rank_differences(const std::vector<double>& diffs) {
  const std::size_t n = diffs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t lhs, std::size_t rhs) {
    return std::abs(diffs[lhs]) < std::abs(diffs[rhs]);
  });

  RankedDifferences out;
  out.ranks.resize(n);
  out.signs.resize(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n &&
           std::abs(diffs[order[j]]) == std::abs(diffs[order[i]])) {
      ++j;
    }
    // Positions i..j-1 share the same |d|; average their 1-based ranks.
    const double average_rank = (static_cast<double>(i + 1) +
                                 static_cast<double>(j)) /
                                2.0;
    for (std::size_t k = i; k < j; ++k) {
      out.ranks[order[k]] = average_rank;
    }
    out.tie_sizes.push_back(static_cast<int>(j - i));
    i = j;
  }
  for (std::size_t k = 0; k < n; ++k) {
    out.signs[k] = diffs[k] > 0.0 ? 1 : -1;
    if (out.signs[k] > 0) {
      out.w_plus += out.ranks[k];
    }
    out.mean_difference += diffs[k];
  }
  out.mean_difference /= static_cast<double>(n);
  return out;
}

/// Exact two-sided p: distribution of W+ over all 2^n sign assignments via
/// subset-sum counting on doubled (integer) ranks.
double exact_p_value(const RankedDifferences& ranked) {
  const std::size_t n = ranked.ranks.size();
  std::vector<long long> doubled(n);
  long long total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    doubled[i] = std::llround(2.0 * ranked.ranks[i]);
    total += doubled[i];
  }
  std::vector<double> ways(static_cast<std::size_t>(total) + 1, 0.0);
  ways[0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (long long s = total; s >= doubled[i]; --s) {
      ways[static_cast<std::size_t>(s)] +=
          ways[static_cast<std::size_t>(s - doubled[i])];
    }
  }
  const long long observed = std::llround(2.0 * ranked.w_plus);
  double below = 0.0;
  double above = 0.0;
  for (long long s = 0; s <= total; ++s) {
    if (s <= observed) {
      below += ways[static_cast<std::size_t>(s)];
    }
    if (s >= observed) {
      above += ways[static_cast<std::size_t>(s)];
    }
  }
  const double count = std::pow(2.0, static_cast<double>(n));
  return std::min(1.0, 2.0 * std::min(below, above) / count);
}

/// Normal approximation with tie correction on the variance.
double approximate_p_value(const RankedDifferences& ranked) {
  const double n = static_cast<double>(ranked.ranks.size());
  const double mean = n * (n + 1.0) / 4.0;
  double tie_term = 0.0;
  for (const int t : ranked.tie_sizes) {
    const double td = static_cast<double>(t);
    tie_term += td * td * td - td;
  }
  const double variance =
      n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
  if (variance <= 0.0) {
    // All differences tied at one magnitude with n large; degenerate.
    return 1.0;
  }
  const double z = (ranked.w_plus - mean) / std::sqrt(variance);
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

}  // namespace

std::vector<int> argmax_predictions(const ProbabilityBatch& probs) {
  std::vector<int> predictions(static_cast<std::size_t>(probs.size()));
  for (int i = 0; i < probs.size(); ++i) {
    int best = 0;
    for (int c = 1; c < probs.class_count(); ++c) {
      if (probs.values(i, c) > probs.values(i, best)) {
        best = c;
      }
    }
    predictions[static_cast<std::size_t>(i)] = best;
  }
  return predictions;
}

double accuracy(const std::vector<int>& predictions,
                const std::vector<int>& targets) {
  check_pair(predictions, targets);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    hits += predictions[i] == targets[i] ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

double mae(const std::vector<int>& predictions,
           const std::vector<int>& targets) {
  check_pair(predictions, targets);
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    total += std::abs(predictions[i] - targets[i]);
  }
  return total / static_cast<double>(predictions.size());
}

double mse(const std::vector<int>& predictions,
           const std::vector<int>& targets) {
  check_pair(predictions, targets);
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - targets[i];
    total += d * d;
  }
  return total / static_cast<double>(predictions.size());
}

double superclass_accuracy(const std::vector<int>& predictions,
                           const std::vector<int>& targets,
                           const SuperclassMap& map) {
  check_pair(predictions, targets);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    hits += map.superclass_of(predictions[i]) == map.superclass_of(targets[i])
                ? 1
                : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

std::optional<double> failed_superclass_accuracy(
    const std::vector<int>& predictions, const std::vector<int>& targets,
    const SuperclassMap& map) {
  check_pair(predictions, targets);
  std::size_t misses = 0;
  std::size_t superclass_hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == targets[i]) {
      continue;
    }
    ++misses;
    superclass_hits +=
        map.superclass_of(predictions[i]) == map.superclass_of(targets[i]) ? 1
                                                                           : 0;
  }
  if (misses == 0) {
    return std::nullopt;
  }
  return static_cast<double>(superclass_hits) / static_cast<double>(misses);
}

std::optional<WilcoxonResult> wilcoxon_signed_rank(const PairedSamples& samples,
                                                   double alpha) {
  if (samples.a.size() != samples.b.size()) {
    throw std::invalid_argument("paired samples differ in length");
  }
  if (samples.a.empty()) {
    throw std::invalid_argument("paired samples must be non-empty");
  }
  std::vector<double> diffs;
  diffs.reserve(samples.a.size());
  for (std::size_t i = 0; i < samples.a.size(); ++i) {
    const double d = samples.a[i] - samples.b[i];
    if (d != 0.0) {
      diffs.push_back(d);
    }
  }
  if (diffs.empty()) {
    return std::nullopt;
  }

  const RankedDifferences ranked = rank_differences(diffs);
  const double p = diffs.size() <= 20 ? exact_p_value(ranked)
                                      : approximate_p_value(ranked);

  WilcoxonResult result;
  result.p_value = p;
  result.significant = p < alpha;
  if (ranked.mean_difference > 0.0) {
    result.direction = Direction::a_better;
  } else if (ranked.mean_difference < 0.0) {
    result.direction = Direction::b_better;
  } else {
    result.direction = Direction::none;
  }
  return result;
}

Eigen::VectorXd mean_output_distribution(const TrainedModel& model,
                                         const Eigen::MatrixXd& features) {
  if (features.rows() < 1) {
    throw std::invalid_argument("mean_output_distribution needs examples");
  }
  const ProbabilityBatch probs =
      softmax(forward(model.net, model.scaler.transform(features)));
  return probs.values.colwise().mean();
}

Eigen::VectorXd mean_output_distribution(const TrainedModel& model,
                                         const Eigen::MatrixXd& features,
                                         const std::vector<int>& targets,
                                         int target_class) {
  if (static_cast<Eigen::Index>(targets.size()) != features.rows()) {
    throw std::invalid_argument("one target per feature row required");
  }
  std::vector<int> rows;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] == target_class) {
      rows.push_back(static_cast<int>(i));
    }
  }
  if (rows.empty()) {
    throw std::invalid_argument("no examples with target class " +
                                std::to_string(target_class));
  }
  Eigen::MatrixXd selected(static_cast<Eigen::Index>(rows.size()),
                           features.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    selected.row(static_cast<Eigen::Index>(i)) = features.row(rows[i]);
  }
  return mean_output_distribution(model, selected);
}

int representative_class_count(const Eigen::VectorXd& distribution,
                               double threshold) {
  const auto c = distribution.size();
  if (c < 1) {
    throw std::invalid_argument("distribution must be non-empty");
  }
  if (std::abs(distribution.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument("distribution must sum to 1");
  }
  if (c == 1) {
    return distribution(0) > threshold ? 1 : 0;
  }
  int count = 0;
  for (Eigen::Index i = 0; i < c; ++i) {
    const bool left_ok = i == 0 || distribution(i) > distribution(i - 1);
    const bool right_ok = i == c - 1 || distribution(i) > distribution(i + 1);
    if (left_ok && right_ok && distribution(i) > threshold) {
      ++count;
    }
  }
  return count;
}

}  // namespace simloss
