#include "simloss/similarity.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

namespace simloss {

namespace {

constexpr double kSnapTolerance = 1e-9;

[[noreturn]] void fail(const std::string& message) {
  throw std::invalid_argument(message);
}

}  // namespace

SimilarityMatrix::SimilarityMatrix(Eigen::MatrixXd values)
    : values_(std::move(values)) {}

SimilarityMatrix SimilarityMatrix::from_values(Eigen::MatrixXd values) {
  if (values.rows() != values.cols()) {
    fail("similarity matrix must be square");
  }
  const auto c = values.rows();
  if (c < 2) {
    fail("similarity matrix needs at least 2 classes");
  }
  for (Eigen::Index i = 0; i < c; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) {
      double& v = values(i, j);
      if (!std::isfinite(v)) {
        fail("similarity matrix entry is not finite");
      }
      if (v < -kSnapTolerance || v > 1.0 + kSnapTolerance) {
        std::ostringstream msg;
        msg << "similarity matrix entry (" << i << ", " << j << ") = " << v
            << " is outside [0, 1]";
        fail(msg.str());
      }
      v = std::min(1.0, std::max(0.0, v));
    }
    if (std::abs(values(i, i) - 1.0) > kSnapTolerance) {
      std::ostringstream msg;
      msg << "similarity matrix diagonal entry " << i << " = " << values(i, i)
          << " must equal 1";
      fail(msg.str());
    }
    values(i, i) = 1.0;
  }
  return SimilarityMatrix(std::move(values));
}

EmbeddingTable::EmbeddingTable(std::vector<std::string> names,
                               Eigen::MatrixXd vectors)
    : names_(std::move(names)), vectors_(std::move(vectors)) {}

EmbeddingTable EmbeddingTable::create(std::vector<std::string> names,
                                      Eigen::MatrixXd vectors) {
  if (names.empty()) {
    fail("embedding table must not be empty");
  }
  if (static_cast<Eigen::Index>(names.size()) != vectors.rows()) {
    fail("embedding table needs exactly one vector per name");
  }
  if (vectors.cols() < 1) {
    fail("embedding vectors need dimension >= 1");
  }
  std::set<std::string> seen;
  for (const auto& name : names) {
    if (!seen.insert(name).second) {
      fail("duplicate class name in embedding table: " + name);
    }
  }
  for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
    if (!vectors.row(i).allFinite()) {
      fail("embedding vector for " + names[static_cast<std::size_t>(i)] +
           " has non-finite entries");
    }
    if (vectors.row(i).norm() <= 0.0) {
      fail("embedding vector for " + names[static_cast<std::size_t>(i)] +
           " has zero norm");
    }
  }
  return EmbeddingTable(std::move(names), std::move(vectors));
}

SimilarityMatrix identity_matrix(int class_count) {
  if (class_count < 2) {
    fail("identity_matrix requires class_count >= 2");
  }
  return SimilarityMatrix::from_values(
      Eigen::MatrixXd::Identity(class_count, class_count));
}

SimilarityMatrix order_matrix(int class_count, double reduction_factor) {
  if (class_count < 2) {
    fail("order_matrix requires class_count >= 2");
  }
  if (!(reduction_factor >= 0.0 && reduction_factor < 1.0)) {
    fail("order_matrix requires reduction_factor in [0, 1)");
  }
  if (reduction_factor == 0.0) {
    // 0^0 = 1 by convention; realized as an explicit identity rather than
    // relying on pow(0, 0).
    return identity_matrix(class_count);
  }
  Eigen::MatrixXd values(class_count, class_count);
  for (int i = 0; i < class_count; ++i) {
    values(i, i) = 1.0;
    for (int j = i + 1; j < class_count; ++j) {
      const double v = std::pow(reduction_factor, j - i);
      values(i, j) = v;
      values(j, i) = v;
    }
  }
  return SimilarityMatrix::from_values(std::move(values));
}

double cosine_similarity_clamped(const EmbeddingTable& table, int i, int j) {
  if (i < 0 || i >= table.size() || j < 0 || j >= table.size()) {
    throw std::out_of_range("embedding index out of range");
  }
  if (i == j) {
    return 1.0;
  }
  const auto a = table.vectors().row(i);
  const auto b = table.vectors().row(j);
  const double cosine = a.dot(b) / (a.norm() * b.norm());
  return std::max(0.0, cosine);
}

Eigen::MatrixXd cosine_similarity_matrix(const EmbeddingTable& table) {
  const int c = table.size();
  Eigen::MatrixXd sim(c, c);
  for (int i = 0; i < c; ++i) {
    sim(i, i) = 1.0;
    for (int j = i + 1; j < c; ++j) {
      const double v = cosine_similarity_clamped(table, i, j);
      sim(i, j) = v;
      sim(j, i) = v;
    }
  }
  return sim;
}

SimilarityMatrix lower_bound_matrix(const Eigen::MatrixXd& raw_sim,
                                    double lower_bound) {
  if (!(lower_bound >= 0.0 && lower_bound < 1.0)) {
    fail("lower_bound_matrix requires lower_bound in [0, 1)");
  }
  if (raw_sim.rows() != raw_sim.cols() || raw_sim.rows() < 2) {
    fail("lower_bound_matrix requires a square matrix with >= 2 classes");
  }
  for (Eigen::Index i = 0; i < raw_sim.rows(); ++i) {
    if (std::abs(raw_sim(i, i) - 1.0) > kSnapTolerance) {
      fail("lower_bound_matrix requires a unit diagonal in raw_sim");
    }
  }
  Eigen::MatrixXd values =
      ((raw_sim.array() - lower_bound).max(0.0) / (1.0 - lower_bound))
          .matrix();
  values.diagonal().setOnes();
  return SimilarityMatrix::from_values(std::move(values));
}

Eigen::MatrixXd row_normalize(const SimilarityMatrix& matrix) {
  Eigen::MatrixXd values = matrix.values();
  const Eigen::VectorXd row_sums = values.rowwise().sum();
  // Unit diagonal guarantees strictly positive row sums.
  values.array().colwise() /= row_sums.array();
  return values;
}

EmbeddingTable parse_embeddings(std::istream& in) {
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
  Eigen::Index dim = -1;

  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    std::istringstream fields(line);
    std::string name;
    fields >> name;
    std::vector<double> vec;
    std::string token;
    while (fields >> token) {
      char* end = nullptr;
      const double value = std::strtod(token.c_str(), &end);
      if (end == nullptr || *end != '\0') {
        throw std::runtime_error("embedding file line " +
                                 std::to_string(line_number) +
                                 ": not a number: '" + token + "'");
      }
      vec.push_back(value);
    }
    if (vec.empty()) {
      throw std::runtime_error("embedding file line " +
                               std::to_string(line_number) +
                               ": expected `name v1 ... vd`");
    }
    if (dim < 0) {
      dim = static_cast<Eigen::Index>(vec.size());
    } else if (static_cast<Eigen::Index>(vec.size()) != dim) {
      throw std::runtime_error(
          "embedding file line " + std::to_string(line_number) + ": expected " +
          std::to_string(dim) + " values, got " + std::to_string(vec.size()));
    }
    names.push_back(std::move(name));
    rows.push_back(std::move(vec));
  }
  if (names.empty()) {
    throw std::runtime_error("embedding file contains no entries");
  }
  Eigen::MatrixXd vectors(static_cast<Eigen::Index>(rows.size()), dim);
  for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      vectors(i, j) = rows[static_cast<std::size_t>(i)]
                          [static_cast<std::size_t>(j)];
    }
  }
  return EmbeddingTable::create(std::move(names), std::move(vectors));
}

EmbeddingTable load_embedding_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open embedding file: " + path);
  }
  return parse_embeddings(in);
}

void save_embedding_file(const EmbeddingTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write embedding file: " + path);
  }
  out << std::setprecision(17);
  for (int i = 0; i < table.size(); ++i) {
    out << table.names()[static_cast<std::size_t>(i)];
    for (int j = 0; j < table.dim(); ++j) {
      out << ' ' << table.vectors()(i, j);
    }
    out << '\n';
  }
  if (!out) {
    throw std::runtime_error("failed writing embedding file: " + path);
  }
}

}  // namespace simloss
