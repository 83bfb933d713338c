#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <vector>

namespace simloss {

/// C x C matrix of pairwise class similarities. Entries lie in [0, 1] and
/// the diagonal is exactly 1 (a class is fully similar to itself). The
/// identity matrix recovers plain categorical cross entropy.
class SimilarityMatrix {
 public:
  /// Validates and adopts `values`. Entries within 1e-9 of [0, 1] are
  /// clamped into range and diagonal entries within 1e-9 of 1 are snapped
  /// to exactly 1, so matrices assembled from floating-point similarity
  /// scores satisfy the invariants bit-exactly. Larger violations throw
  /// std::invalid_argument.
  static SimilarityMatrix from_values(Eigen::MatrixXd values);

  int class_count() const { return static_cast<int>(values_.rows()); }
  const Eigen::MatrixXd& values() const { return values_; }
  double operator()(int i, int j) const { return values_(i, j); }

 private:
  explicit SimilarityMatrix(Eigen::MatrixXd values);

  Eigen::MatrixXd values_;
};

/// Named class embeddings of a common dimension. Names are unique and every
/// vector has strictly positive norm, so cosine similarities are always
/// defined.
class EmbeddingTable {
 public:
  /// `vectors` holds one row per name. Throws std::invalid_argument on
  /// duplicate names, a row-count mismatch, dimension 0, or a zero vector.
  static EmbeddingTable create(std::vector<std::string> names,
                               Eigen::MatrixXd vectors);

  int size() const { return static_cast<int>(names_.size()); }
  int dim() const { return static_cast<int>(vectors_.cols()); }
  const std::vector<std::string>& names() const { return names_; }
  const Eigen::MatrixXd& vectors() const { return vectors_; }
  Eigen::VectorXd vector(int i) const { return vectors_.row(i); }

 private:
  EmbeddingTable(std::vector<std::string> names, Eigen::MatrixXd vectors);

  std::vector<std::string> names_;
  Eigen::MatrixXd vectors_;
};

/// Identity similarity matrix; the loss reduces to categorical cross
/// entropy under it. Requires class_count >= 2.
SimilarityMatrix identity_matrix(int class_count);

/// Class-order similarity for equidistant classes: entry (i, j) is
/// reduction_factor^|i-j|, with 0^0 defined as 1 so reduction_factor 0
/// yields the identity exactly. Requires reduction_factor in [0, 1).
SimilarityMatrix order_matrix(int class_count, double reduction_factor);

/// Cosine similarity of the embeddings of classes i and j, clamped below at
/// 0. Returns exactly 1 when i == j.
double cosine_similarity_clamped(const EmbeddingTable& table, int i, int j);

/// Full matrix of clamped cosine similarities, diagonal exactly 1.
Eigen::MatrixXd cosine_similarity_matrix(const EmbeddingTable& table);

/// Cuts all similarities below `lower_bound` and rescales the rest so the
/// bound maps to 0: entry (i, j) = max(0, sim(i, j) - l) / (1 - l). The
/// diagonal stays exactly 1. `raw_sim` must be square with a unit diagonal
/// (within 1e-9) and entries in [0, 1]; lower_bound must lie in [0, 1).
SimilarityMatrix lower_bound_matrix(const Eigen::MatrixXd& raw_sim,
                                    double lower_bound);

/// Divides each row by its sum, producing the row-stochastic matrix used by
/// the probability-matrix loss variant. Row sums of the result are 1 within
/// 1e-12.
Eigen::MatrixXd row_normalize(const SimilarityMatrix& matrix);

/// Parses the plain-text embedding format: one class per line,
/// `name v1 v2 ... vd`, single-space separated. Lines with the wrong arity
/// raise a parse error naming the line number.
EmbeddingTable parse_embeddings(std::istream& in);
EmbeddingTable load_embedding_file(const std::string& path);
void save_embedding_file(const EmbeddingTable& table, const std::string& path);

}  // namespace simloss
