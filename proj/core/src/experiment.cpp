#include "simloss/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "simloss/metrics.hpp"
#include "simloss/rng.hpp"
#include "simloss/version.hpp"

namespace simloss {

namespace {

using nlohmann::json;

const std::set<std::string> kKnownMetrics = {
    "accuracy", "mae", "mse", "superclass_accuracy",
    "failed_superclass_accuracy"};

bool lower_is_better(const std::string& metric) {
  return metric == "mae" || metric == "mse";
}

bool config_needs_superclasses(const std::string& metric) {
  return metric == "superclass_accuracy" ||
         metric == "failed_superclass_accuracy";
}

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
  for (const auto& item : obj.items()) {
    if (allowed.find(item.key()) == allowed.end()) {
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

json expect_object(const json& parent, const std::string& key) {
  if (!parent.contains(key)) {
    throw ConfigError("missing required key '" + key + "'");
  }
  if (!parent.at(key).is_object()) {
    throw ConfigError("key '" + key + "' must be an object");
  }
  return parent.at(key);
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
  if (!obj.contains(key)) {
    return fallback;
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + key + "' has the wrong type");
  }
}

template <typename T>
T get_required(const json& obj, const std::string& key,
               const std::string& where) {
  if (!obj.contains(key)) {
    throw ConfigError("missing required key '" + key + "' in " + where);
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + key + "' in " + where + " has the wrong type");
  }
}

Task parse_task(const std::string& name) {
  if (name == "ordinal") {
    return Task::ordinal;
  }
  if (name == "grouped") {
    return Task::grouped;
  }
  if (name == "external") {
    return Task::external;
  }
  throw ConfigError("unknown task '" + name +
                    "' (expected ordinal, grouped, or external)");
}

std::string task_name(Task task) {
  switch (task) {
    case Task::ordinal:
      return "ordinal";
    case Task::grouped:
      return "grouped";
    case Task::external:
      return "external";
  }
  return "?";
}

EarlyStopMetric parse_early_stop(const std::string& name) {
  if (name == "mae") {
    return EarlyStopMetric::validation_mae;
  }
  if (name == "accuracy") {
    return EarlyStopMetric::validation_accuracy;
  }
  throw ConfigError("early_stop_metric must be 'mae' or 'accuracy', got '" +
                    name + "'");
}

std::string early_stop_name(EarlyStopMetric metric) {
  return metric == EarlyStopMetric::validation_mae ? "mae" : "accuracy";
}

std::array<double, 3> parse_split(const json& data) {
  if (!data.contains("split")) {
    return {0.6, 0.2, 0.2};
  }
  const auto vec = get_required<std::vector<double>>(data, "split", "data");
  if (vec.size() != 3) {
    throw ConfigError("data.split must hold exactly 3 fractions");
  }
  return {vec[0], vec[1], vec[2]};
}

bool uses_embedding_grid(const ExperimentConfig& config) {
  return config.task == Task::grouped ||
         (config.task == Task::external &&
          !config.external.embeddings_path.empty());
}

std::string format_grid_value(double value) {
  std::ostringstream out;
  out << value;
  return out.str();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) {
    throw ConfigError("config root must be a JSON object");
  }
  require_keys(root, {"task", "data", "grid", "seeds", "train", "metrics",
                      "baseline"},
               "config");

  ExperimentConfig config;
  config.task = parse_task(get_required<std::string>(root, "task", "config"));

  const json data = expect_object(root, "data");
  config.split_fractions = parse_split(data);
  switch (config.task) {
    case Task::ordinal: {
      require_keys(data,
                   {"class_count", "per_class", "noise_sigma", "seed",
                    "frequency_ratio", "split"},
                   "data");
      config.ordinal.class_count =
          get_required<int>(data, "class_count", "data");
      config.ordinal.per_class = get_required<int>(data, "per_class", "data");
      config.ordinal.noise_sigma =
          get_required<double>(data, "noise_sigma", "data");
      config.ordinal.seed = get_or<std::uint64_t>(data, "seed", 0);
      config.ordinal.frequency_ratio =
          get_or<double>(data, "frequency_ratio", 1.0);
      break;
    }
    case Task::grouped: {
      require_keys(data,
                   {"group_count", "classes_per_group", "per_class",
                    "embed_dim", "within_sigma", "feature_sigma", "seed",
                    "split"},
                   "data");
      config.grouped.group_count =
          get_required<int>(data, "group_count", "data");
      config.grouped.classes_per_group =
          get_required<int>(data, "classes_per_group", "data");
      config.grouped.per_class = get_required<int>(data, "per_class", "data");
      config.grouped.embed_dim = get_or<int>(data, "embed_dim", 16);
      config.grouped.within_sigma = get_or<double>(data, "within_sigma", 0.15);
      config.grouped.feature_sigma =
          get_or<double>(data, "feature_sigma", 0.35);
      config.grouped.seed = get_or<std::uint64_t>(data, "seed", 0);
      break;
    }
    case Task::external: {
      require_keys(data, {"features_csv", "embeddings", "split"}, "data");
      config.external.features_csv =
          get_required<std::string>(data, "features_csv", "data");
      config.external.embeddings_path =
          get_or<std::string>(data, "embeddings", std::string{});
      break;
    }
  }

  config.grid = get_required<std::vector<double>>(root, "grid", "config");
  config.seeds = get_or<std::vector<std::uint64_t>>(
      root, "seeds", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9});

  const bool embedding_grid = uses_embedding_grid(config);
  TrainConfig train;
  train.patience = embedding_grid ? 20 : 10;
  train.early_stop_metric = embedding_grid
                                ? EarlyStopMetric::validation_accuracy
                                : EarlyStopMetric::validation_mae;
  if (root.contains("train")) {
    const json t = expect_object(root, "train");
    require_keys(t,
                 {"learning_rate", "batch_size", "patience", "max_epochs",
                  "early_stop_metric", "seed", "hidden_sizes"},
                 "train");
    train.learning_rate = get_or<double>(t, "learning_rate", train.learning_rate);
    train.batch_size = get_or<int>(t, "batch_size", train.batch_size);
    train.patience = get_or<int>(t, "patience", train.patience);
    train.max_epochs = get_or<int>(t, "max_epochs", train.max_epochs);
    if (t.contains("early_stop_metric")) {
      train.early_stop_metric = parse_early_stop(
          get_required<std::string>(t, "early_stop_metric", "train"));
    }
    train.seed = get_or<std::uint64_t>(t, "seed", 0);
    config.hidden_sizes =
        get_or<std::vector<int>>(t, "hidden_sizes", config.hidden_sizes);
  }
  config.train = train;

  if (root.contains("metrics")) {
    config.metrics =
        get_required<std::vector<std::string>>(root, "metrics", "config");
  } else if (config.task == Task::grouped) {
    config.metrics = {"accuracy", "superclass_accuracy",
                      "failed_superclass_accuracy"};
  } else {
    config.metrics = {"accuracy", "mae", "mse"};
  }

  if (root.contains("baseline")) {
    config.baseline = get_required<double>(root, "baseline", "config");
  } else if (embedding_grid) {
    if (config.grid.empty()) {
      throw ConfigError("grid must not be empty");
    }
    config.baseline = *std::max_element(config.grid.begin(), config.grid.end());
  } else {
    config.baseline = 0.0;
  }

  config.validate();
  return config;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_string(buffer.str());
}

std::string ExperimentConfig::to_json_string() const {
  json data;
  switch (task) {
    case Task::ordinal:
      data = {{"class_count", ordinal.class_count},
              {"per_class", ordinal.per_class},
              {"noise_sigma", ordinal.noise_sigma},
              {"seed", ordinal.seed},
              {"frequency_ratio", ordinal.frequency_ratio}};
      break;
    case Task::grouped:
      data = {{"group_count", grouped.group_count},
              {"classes_per_group", grouped.classes_per_group},
              {"per_class", grouped.per_class},
              {"embed_dim", grouped.embed_dim},
              {"within_sigma", grouped.within_sigma},
              {"feature_sigma", grouped.feature_sigma},
              {"seed", grouped.seed}};
      break;
    case Task::external:
      data = {{"features_csv", external.features_csv}};
      if (!external.embeddings_path.empty()) {
        data["embeddings"] = external.embeddings_path;
      }
      break;
  }
  data["split"] = split_fractions;

  const json root = {
      {"task", task_name(task)},
      {"data", data},
      {"grid", grid},
      {"seeds", seeds},
      {"train",
       {{"learning_rate", train.learning_rate},
        {"batch_size", train.batch_size},
        {"patience", train.patience},
        {"max_epochs", train.max_epochs},
        {"early_stop_metric", early_stop_name(train.early_stop_metric)},
        {"seed", train.seed},
        {"hidden_sizes", hidden_sizes}}},
      {"metrics", metrics},
      {"baseline", baseline},
  };
  return root.dump(2);
}

void ExperimentConfig::validate() const {
  if (grid.empty()) {
    throw ConfigError("grid must not be empty");
  }
  std::set<double> unique_grid(grid.begin(), grid.end());
  if (unique_grid.size() != grid.size()) {
    throw ConfigError("grid values must be unique");
  }
  for (const double value : grid) {
    if (!(value >= 0.0 && value < 1.0)) {
      throw ConfigError("grid value " + format_grid_value(value) +
                        " outside [0, 1)");
    }
  }
  if (unique_grid.find(baseline) == unique_grid.end()) {
    throw ConfigError("baseline " + format_grid_value(baseline) +
                      " is not a grid value");
  }
  if (seeds.empty()) {
    throw ConfigError("seeds must not be empty");
  }
  std::set<std::uint64_t> unique_seeds(seeds.begin(), seeds.end());
  if (unique_seeds.size() != seeds.size()) {
    throw ConfigError("seeds must be unique (runs are paired by seed)");
  }
  try {
    train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("train: ") + e.what());
  }
  if (hidden_sizes.empty()) {
    throw ConfigError("hidden_sizes must name at least one hidden layer");
  }
  for (const int h : hidden_sizes) {
    if (h < 1) {
      throw ConfigError("hidden layer sizes must be positive");
    }
  }
  if (metrics.empty()) {
    throw ConfigError("metrics must not be empty");
  }
  std::set<std::string> seen;
  for (const auto& metric : metrics) {
    if (kKnownMetrics.find(metric) == kKnownMetrics.end()) {
      throw ConfigError("unknown metric '" + metric + "'");
    }
    if (!seen.insert(metric).second) {
      throw ConfigError("duplicate metric '" + metric + "'");
    }
    if (config_needs_superclasses(metric) && task == Task::ordinal) {
      throw ConfigError("metric '" + metric +
                        "' needs superclasses; the ordinal task has none");
    }
  }
  (void)SplitSpec::create(split_fractions[0], split_fractions[1],
                          split_fractions[2], 0);
}

PreparedData prepare_data(const ExperimentConfig& config) {
  switch (config.task) {
    case Task::ordinal:
      return PreparedData{synth_ordinal(config.ordinal), std::nullopt,
                          std::nullopt};
    case Task::grouped: {
      GroupedData generated = synth_grouped(config.grouped);
      Eigen::MatrixXd raw = cosine_similarity_matrix(generated.embeddings);
      return PreparedData{std::move(generated.dataset),
                          std::move(generated.embeddings), std::move(raw)};
    }
    case Task::external: {
      Dataset dataset = load_csv(config.external.features_csv);
      if (config.external.embeddings_path.empty()) {
        return PreparedData{std::move(dataset), std::nullopt, std::nullopt};
      }
      if (!dataset.class_names) {
        // CSV carries no names; classes are addressed by index.
        std::vector<std::string> names;
        names.reserve(static_cast<std::size_t>(dataset.class_count));
        for (int c = 0; c < dataset.class_count; ++c) {
          names.push_back(std::to_string(c));
        }
        dataset.class_names = std::move(names);
      }
      EmbeddingLoadResult loaded = load_embeddings(
          config.external.embeddings_path, *dataset.class_names);
      if (!loaded.dropped.empty()) {
        std::cerr << "simloss: dropping " << loaded.dropped.size()
                  << " classes without embeddings:";
        for (const auto& name : loaded.dropped) {
          std::cerr << ' ' << name;
        }
        std::cerr << '\n';
        dataset = restrict_to_classes(dataset, loaded.kept_classes);
      }
      Eigen::MatrixXd raw = cosine_similarity_matrix(loaded.table);
      return PreparedData{std::move(dataset), std::move(loaded.table),
                          std::move(raw)};
    }
  }
  throw ConfigError("unreachable task");
}

SimilarityMatrix matrix_for_grid_value(const ExperimentConfig& config,
                                       const PreparedData& data,
                                       double grid_value) {
  if (uses_embedding_grid(config)) {
    if (!data.raw_similarity) {
      throw ConfigError("embedding grid requires embeddings");
    }
    return lower_bound_matrix(*data.raw_similarity, grid_value);
  }
  return order_matrix(data.dataset.class_count, grid_value);
}

namespace {

RunMetrics evaluate_run(const TrainedModel& model, const DatasetSplits& splits,
                        const std::vector<std::string>& metric_names,
                        const std::optional<SuperclassMap>& superclasses) {
  const auto eval_split = [&](const Dataset& ds) {
    const ProbabilityBatch probs =
        softmax(forward(model.net, model.scaler.transform(ds.features)));
    const std::vector<int> preds = argmax_predictions(probs);
    std::map<std::string, std::optional<double>> out;
    for (const auto& name : metric_names) {
      if (name == "accuracy") {
        out[name] = accuracy(preds, ds.labels);
      } else if (name == "mae") {
        out[name] = mae(preds, ds.labels);
      } else if (name == "mse") {
        out[name] = mse(preds, ds.labels);
      } else if (name == "superclass_accuracy") {
        out[name] = superclass_accuracy(preds, ds.labels, *superclasses);
      } else if (name == "failed_superclass_accuracy") {
        out[name] = failed_superclass_accuracy(preds, ds.labels, *superclasses);
      }
    }
    return out;
  };
  RunMetrics metrics;
  metrics.validation = eval_split(splits.val);
  metrics.test = eval_split(splits.test);
  return metrics;
}

struct RunOutcome {
  RunMetrics metrics;
  std::optional<TrainedModel> model;
  std::string error;
};

}  // namespace

GridSearchResult run_grid(const ExperimentConfig& config,
                          const RunOptions& options) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  const PreparedData data = prepare_data(config);
  const bool needs_superclasses =
      std::any_of(config.metrics.begin(), config.metrics.end(),
                  config_needs_superclasses);
  if (needs_superclasses && !data.dataset.superclasses) {
    throw ConfigError(
        "configured metrics need superclasses but the dataset has none");
  }

  std::vector<int> layer_sizes;
  layer_sizes.push_back(data.dataset.feature_dim());
  layer_sizes.insert(layer_sizes.end(), config.hidden_sizes.begin(),
                     config.hidden_sizes.end());
  layer_sizes.push_back(data.dataset.class_count);

  std::vector<SimilarityMatrix> matrices;
  matrices.reserve(config.grid.size());
  for (const double value : config.grid) {
    matrices.push_back(matrix_for_grid_value(config, data, value));
  }

  std::size_t baseline_index = 0;
  for (std::size_t i = 0; i < config.grid.size(); ++i) {
    if (config.grid[i] == config.baseline) {
      baseline_index = i;
    }
  }
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(
      data.dataset.class_count, data.dataset.class_count);
  const bool baseline_is_cce =
      (matrices[baseline_index].values() - identity).cwiseAbs().maxCoeff() <=
      1e-9;
  if (!baseline_is_cce) {
    std::cerr << "simloss: warning: the similarity matrix at baseline "
              << format_grid_value(config.baseline)
              << " is not the identity; the baseline is not a true plain-CCE"
                 " reference\n";
  }

  const std::size_t grid_count = config.grid.size();
  const std::size_t seed_count = config.seeds.size();
  const std::size_t total_runs = grid_count * seed_count;
  std::vector<RunOutcome> outcomes(total_runs);

  std::atomic<std::size_t> next_run{0};
  std::atomic<std::size_t> completed{0};
  std::mutex log_mutex;

  const auto worker = [&]() {
    for (;;) {
      const std::size_t index = next_run.fetch_add(1);
      if (index >= total_runs) {
        return;
      }
      const std::size_t gi = index / seed_count;
      const std::size_t k = index % seed_count;
      RunOutcome& outcome = outcomes[index];
      try {
        const std::uint64_t run_seed =
            rng::mix_seed(config.train.seed, config.seeds[k]);
        const SplitSpec split_spec = SplitSpec::create(
            config.split_fractions[0], config.split_fractions[1],
            config.split_fractions[2], rng::mix_seed(run_seed, 1));
        const DatasetSplits splits = split(data.dataset, split_spec);
        TrainConfig train_config = config.train;
        train_config.seed = rng::mix_seed(run_seed, 2);
        TrainResult trained =
            train(splits, matrices[gi], layer_sizes, train_config);
        outcome.metrics = evaluate_run(trained.model, splits, config.metrics,
                                       data.dataset.superclasses);
        if (options.collect_models) {
          outcome.model = std::move(trained.model);
        }
      } catch (const std::exception& e) {
        outcome.error = e.what();
      }
      const std::size_t finished = completed.fetch_add(1) + 1;
      if (options.progress) {
        const std::lock_guard<std::mutex> lock(log_mutex);
        std::cerr << "simloss: run " << finished << '/' << total_runs
                  << " done (grid " << format_grid_value(config.grid[gi])
                  << ", seed " << config.seeds[k] << ")\n";
      }
    }
  };

  const int jobs = std::max(
      1, std::min(options.jobs, static_cast<int>(total_runs)));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) {
      pool.emplace_back(worker);
    }
    for (auto& thread : pool) {
      thread.join();
    }
  }

  for (std::size_t index = 0; index < total_runs; ++index) {
    if (!outcomes[index].error.empty()) {
      const std::size_t gi = index / seed_count;
      const std::size_t k = index % seed_count;
      throw std::runtime_error(
          "training run failed at grid value " +
          format_grid_value(config.grid[gi]) + ", seed " +
          std::to_string(config.seeds[k]) + ": " + outcomes[index].error);
    }
  }

  ExperimentReport report;
  report.config = config;
  report.rows.resize(grid_count);
  for (std::size_t gi = 0; gi < grid_count; ++gi) {
    GridRow& row = report.rows[gi];
    row.grid_value = config.grid[gi];
    row.per_seed.reserve(seed_count);
    for (std::size_t k = 0; k < seed_count; ++k) {
      row.per_seed.push_back(outcomes[gi * seed_count + k].metrics);
    }
    for (const auto& metric : config.metrics) {
      const auto aggregate = [&](auto member, std::map<std::string, int>& skip,
                                 std::map<std::string, std::optional<double>>&
                                     mean_out) {
        double sum = 0.0;
        int defined = 0;
        for (const auto& run : row.per_seed) {
          const auto& values = run.*member;
          const auto it = values.find(metric);
          if (it != values.end() && it->second) {
            sum += *it->second;
            ++defined;
          }
        }
        skip[metric] = static_cast<int>(seed_count) - defined;
        mean_out[metric] = defined > 0
                               ? std::optional<double>(sum / defined)
                               : std::nullopt;
      };
      aggregate(&RunMetrics::validation, row.skipped_validation,
                row.mean.validation);
      aggregate(&RunMetrics::test, row.skipped_test, row.mean.test);
    }
  }

  // Significance marks against the baseline row, paired by seed.
  for (std::size_t gi = 0; gi < grid_count; ++gi) {
    if (gi == baseline_index) {
      continue;
    }
    GridRow& row = report.rows[gi];
    const GridRow& base = report.rows[baseline_index];
    for (const auto& metric : config.metrics) {
      PairedSamples pairs;
      for (std::size_t k = 0; k < seed_count; ++k) {
        const auto& cand = row.per_seed[k].test.at(metric);
        const auto& ref = base.per_seed[k].test.at(metric);
        if (cand && ref) {
          pairs.a.push_back(*cand);
          pairs.b.push_back(*ref);
        }
      }
      if (pairs.a.empty()) {
        continue;
      }
      const auto result = wilcoxon_signed_rank(pairs);
      if (!result) {
        continue;
      }
      row.p_values[metric] = result->p_value;
      if (!result->significant || result->direction == Direction::none) {
        continue;
      }
      const bool candidate_larger = result->direction == Direction::a_better;
      const bool candidate_better =
          lower_is_better(metric) ? !candidate_larger : candidate_larger;
      row.marks[metric] = candidate_better ? "+" : "-";
    }
  }

  // Per-metric best mean validation value across rows.
  for (const auto& metric : config.metrics) {
    std::optional<std::size_t> best_row;
    std::optional<double> best_value;
    for (std::size_t gi = 0; gi < grid_count; ++gi) {
      const auto& mean = report.rows[gi].mean.validation.at(metric);
      if (!mean) {
        continue;
      }
      const bool better =
          !best_value ||
          (lower_is_better(metric) ? *mean < *best_value : *mean > *best_value);
      if (better) {
        best_value = *mean;
        best_row = gi;
      }
    }
    if (best_row) {
      report.rows[*best_row].best.push_back(metric);
    }
  }

  report.meta.version = std::string(kVersion);
  report.meta.baseline_is_cce = baseline_is_cce;
  report.meta.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  GridSearchResult result;
  result.report = std::move(report);
  if (options.collect_models) {
    result.models.resize(grid_count);
    for (std::size_t gi = 0; gi < grid_count; ++gi) {
      result.models[gi].reserve(seed_count);
      for (std::size_t k = 0; k < seed_count; ++k) {
        result.models[gi].push_back(
            std::move(*outcomes[gi * seed_count + k].model));
      }
    }
  }
  return result;
}

DistributionAnalysis analyze_distributions(
    const ExperimentConfig& config,
    const std::vector<std::vector<TrainedModel>>& models, int target_class,
    double threshold) {
  if (config.task != Task::ordinal) {
    throw ConfigError(
        "distribution analysis needs ordered classes; the '" +
        task_name(config.task) +
        "' task has none, so spike counting is not meaningful");
  }
  if (models.size() != config.grid.size()) {
    throw std::invalid_argument(
        "need one model list per grid value (run with collect_models)");
  }
  const PreparedData data = prepare_data(config);
  if (target_class < 0 || target_class >= data.dataset.class_count) {
    throw ConfigError("target class " + std::to_string(target_class) +
                      " outside [0, " +
                      std::to_string(data.dataset.class_count) + ")");
  }

  DistributionAnalysis analysis;
  analysis.grid_values = config.grid;
  analysis.target_class = target_class;
  analysis.threshold = threshold;

  for (std::size_t gi = 0; gi < models.size(); ++gi) {
    if (models[gi].size() != config.seeds.size()) {
      throw std::invalid_argument("need one model per seed");
    }
    Eigen::VectorXd overall =
        Eigen::VectorXd::Zero(data.dataset.class_count);
    Eigen::VectorXd target = Eigen::VectorXd::Zero(data.dataset.class_count);
    for (const TrainedModel& model : models[gi]) {
      overall += mean_output_distribution(model, data.dataset.features);
      target += mean_output_distribution(model, data.dataset.features,
                                         data.dataset.labels, target_class);
    }
    overall /= static_cast<double>(models[gi].size());
    target /= static_cast<double>(models[gi].size());
    analysis.overall_spike_count.push_back(
        representative_class_count(overall, threshold));
    analysis.target_spike_count.push_back(
        representative_class_count(target, threshold));
    analysis.overall_mean.push_back(std::move(overall));
    analysis.target_class_mean.push_back(std::move(target));
  }
  return analysis;
}

std::string analysis_to_json(const DistributionAnalysis& analysis) {
  json per_grid = json::array();
  for (std::size_t gi = 0; gi < analysis.grid_values.size(); ++gi) {
    const auto to_vector = [](const Eigen::VectorXd& v) {
      return std::vector<double>(v.data(), v.data() + v.size());
    };
    per_grid.push_back(
        {{"grid_value", analysis.grid_values[gi]},
         {"overall_mean", to_vector(analysis.overall_mean[gi])},
         {"overall_spike_count", analysis.overall_spike_count[gi]},
         {"target_class_mean", to_vector(analysis.target_class_mean[gi])},
         {"target_spike_count", analysis.target_spike_count[gi]}});
  }
  const json root = {{"target_class", analysis.target_class},
                     {"threshold", analysis.threshold},
                     {"per_grid", per_grid}};
  return root.dump(2);
}

}  // namespace simloss
