#ifndef WCM_BOMP_HPP
#define WCM_BOMP_HPP

#include <algorithm>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "wcm/block_model.hpp"

namespace wcm {

struct BompConfig {
  Index k_blocks = 1;
  double ls_tol = 1e-10;  // relative pivot threshold of the least-squares refit

  void validate(Index num_blocks) const {
    if (k_blocks < 1 || k_blocks > num_blocks) {
      throw DomainError("BompConfig: k_blocks must lie in [1, " + std::to_string(num_blocks) +
                        "], got " + std::to_string(k_blocks));
    }
    if (!(ls_tol > 0)) throw DomainError("BompConfig: ls_tol must be positive");
  }
};

namespace detail {

inline std::string support_string(std::vector<Index> support) {
  std::sort(support.begin(), support.end());
  std::string out = "{";
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(support[i]);
  }
  return out + "}";
}

}  // namespace detail

/**
 * Block orthogonal matching pursuit.
 *
 * Runs exactly cfg.k_blocks iterations. Each iteration adds the unselected
 * block j maximizing |E[j]' r|_2 (lowest index on ties), then refits all
 * selected coefficients by least squares and recomputes the residual r.
 * Columns of E are used as given. If `residual_norms` is non-null it receives
 * |r| before the first and after every iteration.
 */
template <typename DerivedE, typename DerivedY>
BlockSparseVec<typename DerivedE::Scalar> bomp_decode(
    const Eigen::MatrixBase<DerivedE>& e, const BlockStructure& structure,
    const Eigen::MatrixBase<DerivedY>& y, const BompConfig& cfg,
    std::vector<typename DerivedE::Scalar>* residual_norms = nullptr) {
  using Scalar = typename DerivedE::Scalar;
  if (e.cols() != structure.num_atoms()) {
    throw DimensionError("bomp_decode: E does not match the block structure");
  }
  if (y.size() != e.rows()) {
    throw DimensionError("bomp_decode: measurement length " + std::to_string(y.size()) +
                         " does not match E with " + std::to_string(e.rows()) + " rows");
  }
  cfg.validate(structure.num_blocks());

  const Vec<Scalar> target = y;
  Vec<Scalar> residual = target;
  Vec<Scalar> coefficients;
  std::vector<Index> selected;
  std::vector<bool> taken(static_cast<std::size_t>(structure.num_blocks()), false);
  Index width = 0;
  if (residual_norms) {
    residual_norms->clear();
    residual_norms->push_back(residual.norm());
  }

  for (Index it = 0; it < cfg.k_blocks; ++it) {
    Index best = -1;
    Scalar best_score = Scalar(-1);
    for (Index j = 0; j < structure.num_blocks(); ++j) {
      if (taken[static_cast<std::size_t>(j)]) continue;
      const Scalar score =
          (e.middleCols(structure.offset(j), structure.size(j)).transpose() * residual)
              .squaredNorm();
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    taken[static_cast<std::size_t>(best)] = true;
    selected.push_back(best);
    width += structure.size(best);

    Mat<Scalar> sub(e.rows(), width);
    Index col = 0;
    for (Index j : selected) {
      sub.middleCols(col, structure.size(j)) =
          e.middleCols(structure.offset(j), structure.size(j));
      col += structure.size(j);
    }
    Eigen::ColPivHouseholderQR<Mat<Scalar>> qr(sub);
    qr.setThreshold(static_cast<Scalar>(cfg.ls_tol));
    if (qr.rank() < width) {
      throw RankDeficientError("bomp_decode: selected columns of blocks " +
                               detail::support_string(selected) + " are rank deficient");
    }
    coefficients = qr.solve(target);
    residual = target - sub * coefficients;
    if (residual_norms) residual_norms->push_back(residual.norm());
  }

  Vec<Scalar> values = Vec<Scalar>::Zero(structure.num_atoms());
  Index col = 0;
  for (Index j : selected) {
    values.segment(structure.offset(j), structure.size(j)) =
        coefficients.segment(col, structure.size(j));
    col += structure.size(j);
  }
  return BlockSparseVec<Scalar>(std::move(values), structure, std::move(selected));
}

template <typename Scalar, typename DerivedY>
BlockSparseVec<Scalar> bomp_decode(const EquivDict<Scalar>& e,
                                   const Eigen::MatrixBase<DerivedY>& y,
                                   const BompConfig& cfg) {
  return bomp_decode(e.matrix, e.structure, y, cfg);
}

/// Decodes every column of `y`; returns the K x L coefficient matrix.
template <typename Scalar, typename DerivedY>
Mat<Scalar> bomp_decode_all(const EquivDict<Scalar>& e, const Eigen::MatrixBase<DerivedY>& y,
                            const BompConfig& cfg) {
  Mat<Scalar> out(e.matrix.cols(), y.cols());
  for (Index c = 0; c < y.cols(); ++c) {
    out.col(c) = bomp_decode(e.matrix, e.structure, y.col(c), cfg).values();
  }
  return out;
}

}  // namespace wcm

#endif  // WCM_BOMP_HPP
