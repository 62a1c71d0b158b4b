#ifndef WCM_BLOCK_MODEL_HPP
#define WCM_BLOCK_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wcm/errors.hpp"

namespace wcm {

using Index = Eigen::Index;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Relative eigenvalue threshold on DD' below which a dictionary is treated
/// as rank deficient.
inline constexpr double kRankTol = 1e-10;

/**
 * Ordered partition of dictionary columns into contiguous blocks.
 *
 * Block j covers columns [offset(j), offset(j) + size(j)). Sizes are all
 * positive and sum to num_atoms().
 */
class BlockStructure {
 public:
  BlockStructure() = default;
  explicit BlockStructure(std::vector<Index> sizes);

  /// `num_blocks` blocks of `block_size` atoms each.
  static BlockStructure uniform(Index block_size, Index num_blocks);

  Index num_blocks() const { return static_cast<Index>(sizes_.size()); }
  Index num_atoms() const { return offsets_.empty() ? 0 : offsets_.back(); }
  Index size(Index j) const { return sizes_[static_cast<std::size_t>(j)]; }
  Index offset(Index j) const { return offsets_[static_cast<std::size_t>(j)]; }
  const std::vector<Index>& sizes() const { return sizes_; }

  /// Block index owning column `atom`.
  Index block_of(Index atom) const;

  bool is_uniform() const;
  /// Common block size; throws DomainError when sizes differ.
  Index uniform_size() const;

  /// Same block sizes, visited in `order` (a permutation of 0..B-1).
  BlockStructure permuted(const std::vector<Index>& order) const;

  friend bool operator==(const BlockStructure& a, const BlockStructure& b) {
    return a.sizes_ == b.sizes_;
  }

 private:
  std::vector<Index> sizes_;
  std::vector<Index> offsets_;  // size B+1, offsets_[0] = 0
};

/// Eigen decomposition of a symmetric matrix, eigenvalues in descending order.
template <typename Scalar>
struct SymEig {
  Vec<Scalar> values;
  Mat<Scalar> vectors;  // column i pairs with values(i)
};

/**
 * Symmetric eigendecomposition S = V diag(values) V'.
 *
 * The input is symmetrized as (S + S')/2 first; asymmetry beyond 1e-10
 * relative is rejected as a caller error.
 */
template <typename Derived>
SymEig<typename Derived::Scalar> sym_eig(const Eigen::MatrixBase<Derived>& s) {
  using Scalar = typename Derived::Scalar;
  if (s.rows() != s.cols()) {
    throw DimensionError("sym_eig: matrix is not square");
  }
  if (!s.allFinite()) {
    throw NumericError("sym_eig: non-finite entries");
  }
  const Mat<Scalar> sym = (s + s.transpose()) / Scalar(2);
  const Scalar scale = s.norm();
  if ((s - s.transpose()).norm() > Scalar(1e-10) * scale) {
    throw DomainError("sym_eig: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericError("sym_eig: eigensolver did not converge");
  }
  // Eigen orders ascending.
  SymEig<Scalar> out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

/**
 * N x K dictionary whose columns are grouped by a BlockStructure.
 *
 * Construction checks N <= K and full row rank, and keeps the
 * eigendecomposition of DD' for the designers.
 */
template <typename Scalar>
class Dict {
 public:
  Dict(Mat<Scalar> matrix, BlockStructure structure)
      : matrix_(std::move(matrix)), structure_(std::move(structure)) {
    if (matrix_.cols() != structure_.num_atoms()) {
      throw DimensionError("Dict: column count " + std::to_string(matrix_.cols()) +
                           " does not match block structure total " +
                           std::to_string(structure_.num_atoms()));
    }
    if (matrix_.rows() < 1 || matrix_.rows() > matrix_.cols()) {
      throw DimensionError("Dict: expected 1 <= N <= K, got N=" +
                           std::to_string(matrix_.rows()) + ", K=" +
                           std::to_string(matrix_.cols()));
    }
    if (!matrix_.allFinite()) {
      throw NumericError("Dict: non-finite entries");
    }
    gram_eig_ = sym_eig(Mat<Scalar>(matrix_ * matrix_.transpose()));
    const Scalar top = gram_eig_.values(0);
    const Scalar bottom = gram_eig_.values(gram_eig_.values.size() - 1);
    if (!(top > Scalar(0)) || bottom <= Scalar(kRankTol) * top) {
      throw RankDeficientError("Dict: dictionary does not have full row rank");
    }
  }

  const Mat<Scalar>& matrix() const { return matrix_; }
  const BlockStructure& structure() const { return structure_; }
  Index rows() const { return matrix_.rows(); }
  Index cols() const { return matrix_.cols(); }

  /// Eigendecomposition U diag(lambda) U' of DD', descending.
  const SymEig<Scalar>& row_gram_eig() const { return gram_eig_; }

  /// Lambda^{-1/2} U': maps D onto a matrix with orthonormal rows.
  Mat<Scalar> whitener() const {
    return gram_eig_.values.cwiseSqrt().cwiseInverse().asDiagonal() *
           gram_eig_.vectors.transpose();
  }

 private:
  Mat<Scalar> matrix_;
  BlockStructure structure_;
  SymEig<Scalar> gram_eig_;
};

/// M x N measurement operator with M < N.
template <typename Scalar>
class SensingMatrix {
 public:
  explicit SensingMatrix(Mat<Scalar> matrix) : matrix_(std::move(matrix)) {
    if (matrix_.rows() < 1 || matrix_.rows() >= matrix_.cols()) {
      throw DimensionError("SensingMatrix: expected 1 <= M < N, got M=" +
                           std::to_string(matrix_.rows()) + ", N=" +
                           std::to_string(matrix_.cols()));
    }
  }

  const Mat<Scalar>& matrix() const { return matrix_; }
  Index rows() const { return matrix_.rows(); }
  Index cols() const { return matrix_.cols(); }

 private:
  Mat<Scalar> matrix_;
};

/// Equivalent dictionary E = AD, carrying D's block structure.
template <typename Scalar>
struct EquivDict {
  Mat<Scalar> matrix;
  BlockStructure structure;
};

template <typename DerivedA, typename DerivedD>
EquivDict<typename DerivedA::Scalar> equivalent_dictionary(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedD>& d,
    const BlockStructure& structure) {
  if (a.cols() != d.rows()) {
    throw DimensionError("equivalent_dictionary: A has " + std::to_string(a.cols()) +
                         " columns but D has " + std::to_string(d.rows()) + " rows");
  }
  if (d.cols() != structure.num_atoms()) {
    throw DimensionError("equivalent_dictionary: D does not match block structure");
  }
  return {a * d, structure};
}

template <typename Scalar>
EquivDict<Scalar> equivalent_dictionary(const SensingMatrix<Scalar>& a,
                                        const Dict<Scalar>& d) {
  return equivalent_dictionary(a.matrix(), d.matrix(), d.structure());
}

/**
 * Gram matrix G = E'E with its block partition.
 *
 * The validating constructor accepts any symmetric PSD matrix; gram()
 * builds one from an equivalent dictionary without the eigenvalue check.
 */
template <typename Scalar>
class GramParts {
 public:
  GramParts(Mat<Scalar> gram, BlockStructure structure)
      : GramParts(std::move(gram), std::move(structure), Unchecked{}) {
    const Scalar scale = gram_.norm();
    if ((gram_ - gram_.transpose()).norm() > Scalar(1e-12) * scale) {
      throw DomainError("GramParts: matrix is not symmetric");
    }
    if (gram_.rows() > 0) {
      const auto eig = sym_eig(gram_);
      if (eig.values(eig.values.size() - 1) < Scalar(-1e-10) * scale) {
        throw DomainError("GramParts: matrix is not positive semidefinite");
      }
    }
  }

  const Mat<Scalar>& matrix() const { return gram_; }
  const BlockStructure& structure() const { return structure_; }
  Index size() const { return gram_.rows(); }

  /// s_i x s_j view G[i,j].
  auto block(Index i, Index j) const {
    return gram_.block(structure_.offset(i), structure_.offset(j), structure_.size(i),
                       structure_.size(j));
  }

  /// Skips the PSD eigenvalue check; for matrices that are Gram matrices
  /// by construction.
  static GramParts from_product(Mat<Scalar> gram, BlockStructure structure) {
    return GramParts(std::move(gram), std::move(structure), Unchecked{});
  }

 private:
  struct Unchecked {};
  GramParts(Mat<Scalar> gram, BlockStructure structure, Unchecked)
      : gram_(std::move(gram)), structure_(std::move(structure)) {
    if (gram_.rows() != gram_.cols() || gram_.rows() != structure_.num_atoms()) {
      throw DimensionError("GramParts: matrix is not K x K for the block structure");
    }
  }

  Mat<Scalar> gram_;
  BlockStructure structure_;
};

/// G = E'E; exactly symmetric by construction.
template <typename Derived>
GramParts<typename Derived::Scalar> gram(const Eigen::MatrixBase<Derived>& e,
                                         const BlockStructure& structure) {
  using Scalar = typename Derived::Scalar;
  if (e.cols() != structure.num_atoms()) {
    throw DimensionError("gram: column count does not match block structure");
  }
  Mat<Scalar> g = e.transpose() * e;
  g = ((g + g.transpose()) / Scalar(2)).eval();
  return GramParts<Scalar>::from_product(std::move(g), structure);
}

template <typename Scalar>
GramParts<Scalar> gram(const EquivDict<Scalar>& e) {
  return gram(e.matrix, e.structure);
}

/// Gram matrix D'A'AD of the equivalent dictionary.
template <typename Scalar>
GramParts<Scalar> gram(const SensingMatrix<Scalar>& a, const Dict<Scalar>& d) {
  return gram(equivalent_dictionary(a, d));
}

/// Number of blocks of `values` with nonzero Euclidean norm.
template <typename Derived>
Index block_sparsity(const Eigen::MatrixBase<Derived>& values,
                     const BlockStructure& structure) {
  Index count = 0;
  for (Index j = 0; j < structure.num_blocks(); ++j) {
    if (values.segment(structure.offset(j), structure.size(j)).squaredNorm() > 0) {
      ++count;
    }
  }
  return count;
}

/// Coefficient vector that is zero outside the blocks listed in `support`.
template <typename Scalar>
class BlockSparseVec {
 public:
  BlockSparseVec(Vec<Scalar> values, BlockStructure structure, std::vector<Index> support)
      : values_(std::move(values)),
        structure_(std::move(structure)),
        support_(std::move(support)) {
    if (values_.size() != structure_.num_atoms()) {
      throw DimensionError("BlockSparseVec: length does not match block structure");
    }
    std::sort(support_.begin(), support_.end());
    if (std::adjacent_find(support_.begin(), support_.end()) != support_.end()) {
      throw DomainError("BlockSparseVec: duplicate block in support");
    }
    std::vector<bool> active(static_cast<std::size_t>(structure_.num_blocks()), false);
    for (Index j : support_) {
      if (j < 0 || j >= structure_.num_blocks()) {
        throw DomainError("BlockSparseVec: support index out of range");
      }
      active[static_cast<std::size_t>(j)] = true;
    }
    for (Index j = 0; j < structure_.num_blocks(); ++j) {
      if (!active[static_cast<std::size_t>(j)] &&
          (values_.segment(structure_.offset(j), structure_.size(j)).array() != 0).any()) {
        throw DomainError("BlockSparseVec: nonzero entries outside the support");
      }
    }
  }

  const Vec<Scalar>& values() const { return values_; }
  const BlockStructure& structure() const { return structure_; }
  /// Active blocks, ascending.
  const std::vector<Index>& support() const { return support_; }

  auto block(Index j) const { return values_.segment(structure_.offset(j), structure_.size(j)); }
  Index block_sparsity() const { return wcm::block_sparsity(values_, structure_); }

 private:
  Vec<Scalar> values_;
  BlockStructure structure_;
  std::vector<Index> support_;
};

}  // namespace wcm

#endif  // WCM_BLOCK_MODEL_HPP
