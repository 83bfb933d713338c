#include "simloss/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "simloss/rng.hpp"

namespace simloss {

namespace {

[[noreturn]] void fail(const std::string& message) {
  throw std::invalid_argument(message);
}

[[noreturn]] void parse_fail(const std::string& path, int line,
                             const std::string& message) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + message);
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string current;
  for (const char ch : line) {
    if (ch == sep) {
      fields.push_back(current);
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  fields.push_back(current);
  return fields;
}

double parse_double(const std::string& token, const std::string& path,
                    int line) {
  char* end = nullptr;
  const double value = std::strtod(token.c_str(), &end);
  if (token.empty() || end == nullptr || *end != '\0') {
    parse_fail(path, line, "not a number: '" + token + "'");
  }
  return value;
}

int parse_int(const std::string& token, const std::string& path, int line) {
  char* end = nullptr;
  const long value = std::strtol(token.c_str(), &end, 10);
  if (token.empty() || end == nullptr || *end != '\0') {
    parse_fail(path, line, "not an integer: '" + token + "'");
  }
  return static_cast<int>(value);
}

}  // namespace

SuperclassMap SuperclassMap::create(std::vector<int> mapping) {
  if (mapping.empty()) {
    fail("superclass map must not be empty");
  }
  for (std::size_t i = 0; i < mapping.size(); ++i) {
    if (mapping[i] < 0) {
      fail("superclass of class " + std::to_string(i) + " is negative");
    }
  }
  return SuperclassMap{std::move(mapping)};
}

int SuperclassMap::superclass_of(int class_index) const {
  if (class_index < 0 || class_index >= class_count()) {
    throw std::out_of_range("class index " + std::to_string(class_index) +
                            " outside superclass map");
  }
  return mapping[static_cast<std::size_t>(class_index)];
}

Dataset Dataset::create(Eigen::MatrixXd features, std::vector<int> labels,
                        int class_count,
                        std::optional<SuperclassMap> superclasses,
                        std::optional<std::vector<std::string>> class_names) {
  if (features.rows() < 1) {
    fail("dataset must contain at least one example");
  }
  if (static_cast<Eigen::Index>(labels.size()) != features.rows()) {
    fail("dataset needs exactly one label per feature row");
  }
  if (class_count < 2) {
    fail("dataset needs class_count >= 2");
  }
  if (!features.allFinite()) {
    fail("dataset features contain non-finite values");
  }
  for (const int label : labels) {
    if (label < 0 || label >= class_count) {
      fail("label " + std::to_string(label) + " outside [0, " +
           std::to_string(class_count) + ")");
    }
  }
  if (superclasses && superclasses->class_count() != class_count) {
    fail("superclass map size does not match class_count");
  }
  if (class_names &&
      static_cast<int>(class_names->size()) != class_count) {
    fail("class name list size does not match class_count");
  }
  return Dataset{std::move(features), std::move(labels), class_count,
                 std::move(superclasses), std::move(class_names)};
}

SplitSpec SplitSpec::create(double train_fraction, double val_fraction,
                            double test_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && val_fraction > 0.0 && test_fraction > 0.0)) {
    fail("split fractions must each be positive");
  }
  if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9) {
    fail("split fractions must sum to 1");
  }
  return SplitSpec{train_fraction, val_fraction, test_fraction, seed};
}

Dataset synth_ordinal(const OrdinalSpec& spec) {
  if (spec.class_count < 2) {
    fail("synth_ordinal requires class_count >= 2");
  }
  if (spec.per_class < 1) {
    fail("synth_ordinal requires per_class >= 1");
  }
  if (!(spec.noise_sigma > 0.0)) {
    fail("synth_ordinal requires noise_sigma > 0");
  }
  if (!(spec.frequency_ratio > 0.0 && spec.frequency_ratio <= 1.0)) {
    fail("synth_ordinal requires frequency_ratio in (0, 1]");
  }

  std::vector<int> counts(static_cast<std::size_t>(spec.class_count));
  int total = 0;
  for (int c = 0; c < spec.class_count; ++c) {
    const double scaled =
        spec.per_class * std::pow(spec.frequency_ratio, c);
    counts[static_cast<std::size_t>(c)] =
        std::max(1, static_cast<int>(std::lround(scaled)));
    total += counts[static_cast<std::size_t>(c)];
  }

  rng::Xoshiro256StarStar gen(spec.seed);
  Eigen::MatrixXd features(total, 3);
  std::vector<int> labels(static_cast<std::size_t>(total));
  const double c_scale = static_cast<double>(spec.class_count);
  int row = 0;
  for (int c = 0; c < spec.class_count; ++c) {
    for (int k = 0; k < counts[static_cast<std::size_t>(c)]; ++k) {
      const double g1 = gen.gaussian(spec.noise_sigma);
      const double g2 = gen.gaussian(spec.noise_sigma);
      const double g3 = gen.gaussian(spec.noise_sigma);
      features(row, 0) = (c + g1) / c_scale;
      features(row, 1) = std::sin(2.0 * std::numbers::pi * (c + g2) / c_scale);
      features(row, 2) = std::cos(2.0 * std::numbers::pi * (c + g3) / c_scale);
      labels[static_cast<std::size_t>(row)] = c;
      ++row;
    }
  }
  return Dataset::create(std::move(features), std::move(labels),
                         spec.class_count);
}

GroupedData synth_grouped(const GroupedSpec& spec) {
  if (spec.group_count < 2) {
    fail("synth_grouped requires group_count >= 2");
  }
  if (spec.classes_per_group < 2) {
    fail("synth_grouped requires classes_per_group >= 2");
  }
  if (spec.per_class < 1) {
    fail("synth_grouped requires per_class >= 1");
  }
  if (spec.embed_dim < 1) {
    fail("synth_grouped requires embed_dim >= 1");
  }
  if (spec.within_sigma < 0.0 || !(spec.feature_sigma >= 0.0)) {
    fail("synth_grouped requires nonnegative sigmas");
  }

  const int class_count = spec.group_count * spec.classes_per_group;
  rng::Xoshiro256StarStar gen(spec.seed);

  Eigen::MatrixXd embeddings(class_count, spec.embed_dim);
  std::vector<int> superclass(static_cast<std::size_t>(class_count));
  std::vector<std::string> names(static_cast<std::size_t>(class_count));
  for (int g = 0; g < spec.group_count; ++g) {
    Eigen::VectorXd centroid(spec.embed_dim);
    for (int d = 0; d < spec.embed_dim; ++d) {
      centroid(d) = gen.gaussian();
    }
    centroid.normalize();
    for (int k = 0; k < spec.classes_per_group; ++k) {
      const int c = g * spec.classes_per_group + k;
      Eigen::VectorXd vec = centroid;
      for (int d = 0; d < spec.embed_dim; ++d) {
        vec(d) += gen.gaussian(spec.within_sigma);
      }
      vec.normalize();
      embeddings.row(c) = vec;
      superclass[static_cast<std::size_t>(c)] = g;
      names[static_cast<std::size_t>(c)] =
          "g" + std::to_string(g) + "_c" + std::to_string(k);
    }
  }

  const int total = class_count * spec.per_class;
  Eigen::MatrixXd features(total, spec.embed_dim);
  std::vector<int> labels(static_cast<std::size_t>(total));
  int row = 0;
  for (int c = 0; c < class_count; ++c) {
    for (int k = 0; k < spec.per_class; ++k) {
      for (int d = 0; d < spec.embed_dim; ++d) {
        features(row, d) = embeddings(c, d) + gen.gaussian(spec.feature_sigma);
      }
      labels[static_cast<std::size_t>(row)] = c;
      ++row;
    }
  }

  EmbeddingTable table = EmbeddingTable::create(names, std::move(embeddings));
  Dataset dataset = Dataset::create(
      std::move(features), std::move(labels), class_count,
      SuperclassMap::create(std::move(superclass)), std::move(names));
  return GroupedData{std::move(dataset), std::move(table)};
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open dataset file: " + path);
  }

  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path + ": empty file");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  const std::vector<std::string> header = split_fields(line, ',');

  int label_col = -1;
  int superclass_col = -1;
  std::vector<int> feature_cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "label") {
      label_col = static_cast<int>(i);
    } else if (header[i] == "superclass") {
      superclass_col = static_cast<int>(i);
    } else if (header[i].size() >= 2 && header[i][0] == 'f' &&
               std::all_of(header[i].begin() + 1, header[i].end(),
                           [](unsigned char ch) { return std::isdigit(ch); })) {
      feature_cols.push_back(static_cast<int>(i));
    } else {
      parse_fail(path, 1, "unexpected column '" + header[i] + "'");
    }
  }
  if (label_col < 0) {
    parse_fail(path, 1, "missing 'label' column");
  }
  if (feature_cols.empty()) {
    parse_fail(path, 1, "no feature columns (expected f0..f{d-1})");
  }

  std::vector<std::vector<double>> feature_rows;
  std::vector<int> labels;
  std::vector<int> superclass_by_row;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const std::vector<std::string> fields = split_fields(line, ',');
    if (fields.size() != header.size()) {
      parse_fail(path, line_number,
                 "expected " + std::to_string(header.size()) +
                     " fields, got " + std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(feature_cols.size());
    for (const int col : feature_cols) {
      row.push_back(parse_double(fields[static_cast<std::size_t>(col)], path,
                                 line_number));
    }
    feature_rows.push_back(std::move(row));
    const int label =
        parse_int(fields[static_cast<std::size_t>(label_col)], path,
                  line_number);
    if (label < 0) {
      parse_fail(path, line_number, "negative label");
    }
    labels.push_back(label);
    if (superclass_col >= 0) {
      superclass_by_row.push_back(parse_int(
          fields[static_cast<std::size_t>(superclass_col)], path, line_number));
    }
  }
  if (feature_rows.empty()) {
    throw std::runtime_error(path + ": no data rows");
  }

  const int class_count = *std::max_element(labels.begin(), labels.end()) + 1;
  Eigen::MatrixXd features(static_cast<Eigen::Index>(feature_rows.size()),
                           static_cast<Eigen::Index>(feature_cols.size()));
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
      features(i, j) = feature_rows[static_cast<std::size_t>(i)]
                                   [static_cast<std::size_t>(j)];
    }
  }

  std::optional<SuperclassMap> superclasses;
  if (superclass_col >= 0) {
    std::vector<int> mapping(static_cast<std::size_t>(class_count), -1);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const auto cls = static_cast<std::size_t>(labels[i]);
      if (mapping[cls] >= 0 && mapping[cls] != superclass_by_row[i]) {
        throw std::runtime_error(path + ": class " + std::to_string(labels[i]) +
                                 " maps to multiple superclasses");
      }
      mapping[cls] = superclass_by_row[i];
    }
    for (std::size_t cls = 0; cls < mapping.size(); ++cls) {
      if (mapping[cls] < 0) {
        throw std::runtime_error(path + ": class " + std::to_string(cls) +
                                 " has no examples, superclass unknown");
      }
    }
    superclasses = SuperclassMap::create(std::move(mapping));
  }

  return Dataset::create(std::move(features), std::move(labels), class_count,
                         std::move(superclasses));
}

void save_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write dataset file: " + path);
  }
  out << std::setprecision(17);
  for (int j = 0; j < dataset.feature_dim(); ++j) {
    out << 'f' << j << ',';
  }
  out << "label";
  if (dataset.superclasses) {
    out << ",superclass";
  }
  out << '\n';
  for (int i = 0; i < dataset.size(); ++i) {
    for (int j = 0; j < dataset.feature_dim(); ++j) {
      out << dataset.features(i, j) << ',';
    }
    const int label = dataset.labels[static_cast<std::size_t>(i)];
    out << label;
    if (dataset.superclasses) {
      out << ',' << dataset.superclasses->superclass_of(label);
    }
    out << '\n';
  }
  if (!out) {
    throw std::runtime_error("failed writing dataset file: " + path);
  }
}

EmbeddingLoadResult load_embeddings(const std::string& path,
                                    const std::vector<std::string>& class_names) {
  const EmbeddingTable all = load_embedding_file(path);
  std::unordered_map<std::string, int> index;
  for (int i = 0; i < all.size(); ++i) {
    index.emplace(all.names()[static_cast<std::size_t>(i)], i);
  }

  std::vector<std::string> kept_names;
  std::vector<int> kept_classes;
  std::vector<int> source_rows;
  std::vector<std::string> dropped;
  for (std::size_t c = 0; c < class_names.size(); ++c) {
    const auto it = index.find(class_names[c]);
    if (it == index.end()) {
      dropped.push_back(class_names[c]);
    } else {
      kept_names.push_back(class_names[c]);
      kept_classes.push_back(static_cast<int>(c));
      source_rows.push_back(it->second);
    }
  }
  if (kept_names.empty()) {
    throw std::runtime_error(path + ": no class name has an embedding");
  }

  Eigen::MatrixXd vectors(static_cast<Eigen::Index>(kept_names.size()),
                          all.dim());
  for (std::size_t i = 0; i < source_rows.size(); ++i) {
    vectors.row(static_cast<Eigen::Index>(i)) =
        all.vectors().row(source_rows[i]);
  }
  return EmbeddingLoadResult{
      EmbeddingTable::create(std::move(kept_names), std::move(vectors)),
      std::move(dropped), std::move(kept_classes)};
}

Dataset restrict_to_classes(const Dataset& dataset,
                            const std::vector<int>& kept_classes) {
  if (kept_classes.size() < 2) {
    fail("restrict_to_classes needs at least 2 kept classes");
  }
  std::vector<int> new_index(static_cast<std::size_t>(dataset.class_count), -1);
  for (std::size_t i = 0; i < kept_classes.size(); ++i) {
    const int cls = kept_classes[i];
    if (cls < 0 || cls >= dataset.class_count) {
      fail("kept class " + std::to_string(cls) + " outside dataset classes");
    }
    if (i > 0 && kept_classes[i] <= kept_classes[i - 1]) {
      fail("kept classes must be ascending and unique");
    }
    new_index[static_cast<std::size_t>(cls)] = static_cast<int>(i);
  }

  std::vector<int> rows;
  for (int i = 0; i < dataset.size(); ++i) {
    if (new_index[static_cast<std::size_t>(
            dataset.labels[static_cast<std::size_t>(i)])] >= 0) {
      rows.push_back(i);
    }
  }
  if (rows.empty()) {
    fail("no examples left after class restriction");
  }

  Eigen::MatrixXd features(static_cast<Eigen::Index>(rows.size()),
                           dataset.feature_dim());
  std::vector<int> labels(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    features.row(static_cast<Eigen::Index>(i)) = dataset.features.row(rows[i]);
    labels[i] = new_index[static_cast<std::size_t>(
        dataset.labels[static_cast<std::size_t>(rows[i])])];
  }

  std::optional<SuperclassMap> superclasses;
  if (dataset.superclasses) {
    std::vector<int> mapping;
    mapping.reserve(kept_classes.size());
    for (const int cls : kept_classes) {
      mapping.push_back(dataset.superclasses->superclass_of(cls));
    }
    superclasses = SuperclassMap::create(std::move(mapping));
  }
  std::optional<std::vector<std::string>> class_names;
  if (dataset.class_names) {
    std::vector<std::string> names;
    names.reserve(kept_classes.size());
    for (const int cls : kept_classes) {
      names.push_back((*dataset.class_names)[static_cast<std::size_t>(cls)]);
    }
    class_names = std::move(names);
  }

  return Dataset::create(std::move(features), std::move(labels),
                         static_cast<int>(kept_classes.size()),
                         std::move(superclasses), std::move(class_names));
}

DatasetSplits split(const Dataset& dataset, const SplitSpec& spec) {
  // Revalidate; SplitSpec is an aggregate and may have been built directly.
  (void)SplitSpec::create(spec.train_fraction, spec.val_fraction,
                          spec.test_fraction, spec.seed);
  const int n = dataset.size();
  const int n_train = static_cast<int>(std::floor(n * spec.train_fraction));
  const int n_val = static_cast<int>(std::floor(n * spec.val_fraction));
  const int n_test = n - n_train - n_val;
  if (n_train < 1 || n_val < 1 || n_test < 1) {
    fail("dataset too small: a split would be empty");
  }

  rng::Xoshiro256StarStar gen(spec.seed);
  const std::vector<int> order = rng::permutation(n, gen);

  const auto take = [&](int begin, int count) {
    Eigen::MatrixXd features(count, dataset.feature_dim());
    std::vector<int> labels(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      const int src = order[static_cast<std::size_t>(begin + i)];
      features.row(i) = dataset.features.row(src);
      labels[static_cast<std::size_t>(i)] =
          dataset.labels[static_cast<std::size_t>(src)];
    }
    return Dataset::create(std::move(features), std::move(labels),
                           dataset.class_count, dataset.superclasses,
                           dataset.class_names);
  };

  return DatasetSplits{take(0, n_train), take(n_train, n_val),
                       take(n_train + n_val, n_test)};
}

}  // namespace simloss
