#pragma once

// Unit-norm text embeddings, pairwise cosine similarity and the
// mean-centrality selector over a set of sampled texts.

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "netsem/error.hpp"

namespace netsem {

template <typename Scalar>
class BasicUnitVector {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  BasicUnitVector() = default;

  /// Normalizes `v`; throws DimMismatch for an empty or zero vector.
  static BasicUnitVector normalized(Vector v) {
    const Scalar norm = v.norm();
    if (v.size() == 0 || !(norm > Scalar(0)) || !std::isfinite(norm))
      throw Error(Errc::DimMismatch, "cannot normalize a zero or non-finite vector");
    BasicUnitVector out;
    out.v_ = v / norm;
    return out;
  }

  Eigen::Index dims() const { return v_.size(); }
  const Vector& components() const { return v_; }
  Scalar operator[](Eigen::Index i) const { return v_[i]; }
  Scalar dot(const BasicUnitVector& other) const {
    if (other.dims() != dims()) throw Error(Errc::DimMismatch, "dot of vectors with different dims");
    return v_.dot(other.v_);
  }

  friend bool operator==(const BasicUnitVector& a, const BasicUnitVector& b) {
    return a.v_.size() == b.v_.size() && (a.v_.array() == b.v_.array()).all();
  }

 private:
  Vector v_;
};

using UnitVector = BasicUnitVector<double>;

template <typename Scalar>
using BasicSimilarityMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using SimilarityMatrix = BasicSimilarityMatrix<double>;

/// S(i,j) = v_i . v_j. The upper triangle is computed and mirrored, so the
/// result is exactly symmetric.
template <typename Scalar>
BasicSimilarityMatrix<Scalar> similarity_matrix(std::span<const BasicUnitVector<Scalar>> vectors) {
  const auto n = static_cast<Eigen::Index>(vectors.size());
  if (n == 0) throw Error(Errc::EmptyList, "similarity_matrix of no vectors");
  const auto d = vectors.front().dims();
  for (const auto& v : vectors)
    if (v.dims() != d) throw Error(Errc::DimMismatch, "vectors have different dims");
  BasicSimilarityMatrix<Scalar> s(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s(i, i) = vectors[i].components().dot(vectors[i].components());
    for (Eigen::Index j = i + 1; j < n; ++j) {
      s(i, j) = vectors[i].components().dot(vectors[j].components());
      s(j, i) = s(i, j);
    }
  }
  return s;
}

template <typename Scalar>
BasicSimilarityMatrix<Scalar> similarity_matrix(const std::vector<BasicUnitVector<Scalar>>& vectors) {
  return similarity_matrix(std::span<const BasicUnitVector<Scalar>>(vectors));
}

/// mu_i = (1/(n-1)) * sum_{j != i} S(i,j), accumulated in ascending j.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> mean_centrality(
    const Eigen::MatrixBase<Derived>& s) {
  using Scalar = typename Derived::Scalar;
  const auto n = s.rows();
  if (s.cols() != n) throw Error(Errc::DimMismatch, "similarity matrix must be square");
  if (n < 2) throw Error(Errc::TooFewTexts, "mean centrality needs at least two texts");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mu(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Scalar sum(0);
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) sum += s(i, j);
    mu[i] = sum / Scalar(n - 1);
  }
  return mu;
}

/// argmax with lowest-index tie-break.
template <typename Derived>
Eigen::Index argmax_lowest(const Eigen::MatrixBase<Derived>& scores) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

/// Index of the most central vector; 0 for a single vector.
template <typename Scalar>
std::size_t select_most_central(std::span<const BasicUnitVector<Scalar>> vectors) {
  if (vectors.empty()) throw Error(Errc::EmptyList, "no vectors to select from");
  if (vectors.size() == 1) return 0;
  return static_cast<std::size_t>(argmax_lowest(mean_centrality(similarity_matrix(vectors))));
}

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual UnitVector embed(std::string_view text) const = 0;
  virtual int dims() const = 0;
};

/// Hashed bag-of-words: lowercase, split on non-alphanumerics, FNV-1a each
/// token into `dims` buckets, count, L2-normalize.
class HashingEmbedder : public Embedder {
 public:
  static constexpr int kDefaultDims = 256;
  static constexpr std::uint64_t kSeed = 0x9e3779b97f4a7c15ULL;

  explicit HashingEmbedder(int dims = kDefaultDims);

  UnitVector embed(std::string_view text) const override;
  int dims() const override { return dims_; }

  static std::vector<std::string> tokenize(std::string_view text);
  static std::uint64_t hash_token(std::string_view token);

 private:
  int dims_;
};

const Embedder& default_embedder();

}  // namespace netsem
