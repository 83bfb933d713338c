#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "simloss/similarity.hpp"

namespace simloss {

/// Total map from class index to superclass index.
struct SuperclassMap {
  std::vector<int> mapping;

  static SuperclassMap create(std::vector<int> mapping);
  int class_count() const { return static_cast<int>(mapping.size()); }
  int superclass_of(int class_index) const;
};

struct Dataset {
  Eigen::MatrixXd features;  // N x d
  std::vector<int> labels;   // N entries in [0, class_count)
  int class_count = 0;
  std::optional<SuperclassMap> superclasses;
  std::optional<std::vector<std::string>> class_names;

  static Dataset create(Eigen::MatrixXd features, std::vector<int> labels,
                        int class_count,
                        std::optional<SuperclassMap> superclasses = {},
                        std::optional<std::vector<std::string>> class_names = {});
  int size() const { return static_cast<int>(features.rows()); }
  int feature_dim() const { return static_cast<int>(features.cols()); }
};

/// Fractions must each be positive and sum to 1 within 1e-9.
struct SplitSpec {
  double train_fraction = 0.6;
  double val_fraction = 0.2;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;

  static SplitSpec create(double train_fraction, double val_fraction,
                          double test_fraction, std::uint64_t seed);
};

struct DatasetSplits {
  Dataset train;
  Dataset val;
  Dataset test;
};

/// Ordinal task generator. Each example of class c gets features
///   [(c + g1)/C, sin(2*pi*(c + g2)/C), cos(2*pi*(c + g3)/C)]
/// with g1, g2, g3 independent Gaussian(0, noise_sigma), so neighboring
/// classes overlap more the larger the noise. With frequency_ratio rho < 1
/// the per-class counts follow m_c = max(1, round(per_class * rho^c)),
/// giving a skewed class distribution; rho = 1 keeps classes balanced.
struct OrdinalSpec {
  int class_count = 30;
  int per_class = 200;
  double noise_sigma = 0.5;
  std::uint64_t seed = 0;
  double frequency_ratio = 1.0;
};
Dataset synth_ordinal(const OrdinalSpec& spec);

/// Grouped task generator. Each of the `group_count` groups gets a random
/// unit-norm centroid in R^embed_dim; each class embedding is the normalized
/// centroid plus Gaussian(0, within_sigma) jitter; each example is its class
/// embedding plus Gaussian(0, feature_sigma) noise. Classes map to their
/// group as superclass, and the class-name embeddings are returned for
/// similarity-matrix construction.
struct GroupedSpec {
  int group_count = 5;
  int classes_per_group = 4;
  int per_class = 150;
  int embed_dim = 16;
  double within_sigma = 0.15;
  double feature_sigma = 0.35;
  std::uint64_t seed = 0;
};
struct GroupedData {
  Dataset dataset;
  EmbeddingTable embeddings;
};
GroupedData synth_grouped(const GroupedSpec& spec);

/// CSV with a header row: feature columns `f0..f{d-1}`, a `label` column,
/// and an optional `superclass` column. class_count is inferred as
/// max(label) + 1. Parse errors name the offending line.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& dataset, const std::string& path);

/// Loads embeddings (format of parse_embeddings) for the given class names.
/// Classes without an embedding are reported as dropped; use
/// restrict_to_classes to remove their examples and reindex labels densely.
struct EmbeddingLoadResult {
  EmbeddingTable table;
  std::vector<std::string> dropped;
  std::vector<int> kept_classes;  // original indices, ascending
};
EmbeddingLoadResult load_embeddings(const std::string& path,
                                    const std::vector<std::string>& class_names);

/// Keeps only examples whose class is in `kept_classes` (ascending original
/// indices) and reindexes labels densely to [0, kept_classes.size()).
Dataset restrict_to_classes(const Dataset& dataset,
                            const std::vector<int>& kept_classes);

/// Partitions examples by a seeded uniform permutation: floor(N * fraction)
/// examples for train and val, the remainder for test. Splits are disjoint,
/// cover the dataset, and carry class_count, superclasses, and class names
/// through unchanged.
DatasetSplits split(const Dataset& dataset, const SplitSpec& spec);

}  // namespace simloss
