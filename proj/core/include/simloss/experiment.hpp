#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "simloss/data.hpp"
#include "simloss/model.hpp"
#include "simloss/similarity.hpp"

namespace simloss {

/// Invalid configuration (bad file, unknown key, inconsistent values). The
/// CLI maps this to exit code 1; other failures exit 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Task { ordinal, grouped, external };

struct ExternalSpec {
  std::string features_csv;
  std::string embeddings_path;  // empty = no embeddings
};

/// Parsed experiment description. JSON files use the top-level keys `task`,
/// `data`, `grid`, `seeds`, `train`, `metrics`, `baseline`; unknown keys
/// anywhere are an error. Missing optional keys get task-dependent defaults
/// (seeds 0..9, hidden sizes [64, 64], metrics and early stopping per task,
/// baseline 0 for order grids and max(grid) for lower-bound grids).
struct ExperimentConfig {
  Task task = Task::ordinal;
  OrdinalSpec ordinal;
  GroupedSpec grouped;
  ExternalSpec external;
  std::array<double, 3> split_fractions{0.6, 0.2, 0.2};
  std::vector<double> grid;
  std::vector<std::uint64_t> seeds;
  TrainConfig train;
  std::vector<int> hidden_sizes{64, 64};
  std::vector<std::string> metrics;
  double baseline = 0.0;

  static ExperimentConfig from_json_string(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);

  /// Canonical JSON echo with all defaults resolved; reports embed this.
  std::string to_json_string() const;

  void validate() const;
};

/// Per-run metric values; keys are metric names, nullopt marks a metric
/// that is undefined for the run (a perfect run has no failed-superclass
/// accuracy).
struct RunMetrics {
  std::map<std::string, std::optional<double>> validation;
  std::map<std::string, std::optional<double>> test;
};

struct GridRow {
  double grid_value = 0.0;
  std::vector<RunMetrics> per_seed;
  RunMetrics mean;  // over seeds where the metric is defined
  std::map<std::string, int> skipped_validation;
  std::map<std::string, int> skipped_test;
  std::map<std::string, std::string> marks;  // test metric -> "+" or "-"
  std::map<std::string, double> p_values;    // test metric -> Wilcoxon p
  std::vector<std::string> best;  // validation metrics this row wins
};

struct ReportMeta {
  std::string version;
  double wall_time_seconds = 0.0;
  bool baseline_is_cce = true;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<GridRow> rows;
  ReportMeta meta;
};

struct RunOptions {
  int jobs = 1;
  bool collect_models = false;
  bool progress = false;  // per-run progress notes on stderr
};

struct GridSearchResult {
  ExperimentReport report;
  /// models[grid_index][seed_index]; empty unless collect_models was set.
  std::vector<std::vector<TrainedModel>> models;
};

/// The dataset (and, for embedding-based tasks, the raw clamped-cosine
/// similarities) shared by every run of a grid search.
struct PreparedData {
  Dataset dataset;
  std::optional<EmbeddingTable> embeddings;
  std::optional<Eigen::MatrixXd> raw_similarity;
};

PreparedData prepare_data(const ExperimentConfig& config);

/// order_matrix(C, value) for order grids, lower_bound_matrix(raw, value)
/// for embedding grids.
SimilarityMatrix matrix_for_grid_value(const ExperimentConfig& config,
                                       const PreparedData& data,
                                       double grid_value);

/// Runs the full protocol: per (grid value, seed) builds the matrix,
/// re-splits with a seed paired across grid values, trains, and evaluates
/// all configured metrics on validation and test; aggregates means, runs
/// the signed-rank test of every non-baseline grid value against the
/// baseline per test metric, and flags per-metric best validation rows.
/// Reruns with the same config produce byte-identical reports modulo
/// meta.wall_time_seconds, independent of the job count.
GridSearchResult run_grid(const ExperimentConfig& config,
                          const RunOptions& options = {});

/// Mean output distributions per grid value (seed-averaged), overall and
/// restricted to one target class, with their representative-class counts.
/// Only defined for tasks with ordered classes; other tasks are refused.
struct DistributionAnalysis {
  std::vector<double> grid_values;
  int target_class = 0;
  double threshold = 0.01;
  std::vector<Eigen::VectorXd> overall_mean;
  std::vector<Eigen::VectorXd> target_class_mean;
  std::vector<int> overall_spike_count;
  std::vector<int> target_spike_count;
};

DistributionAnalysis analyze_distributions(
    const ExperimentConfig& config,
    const std::vector<std::vector<TrainedModel>>& models, int target_class,
    double threshold = 0.01);

std::string analysis_to_json(const DistributionAnalysis& analysis);

}  // namespace simloss
