#ifndef WCM_COHERENCE_HPP
#define WCM_COHERENCE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "wcm/block_model.hpp"

// Coherence measures of a Gram matrix G = E'E partitioned into blocks G[i,j].
//
// Every metric comes in two flavours: one taking a raw K x K Eigen
// expression plus the BlockStructure (usable on non-symmetric matrices, e.g.
// for finite differences), and one taking a validated GramParts.

namespace wcm {

/// Which part of G a mask operator acts on: the diagonal (eta), the
/// cross-block entries (mu) or the within-block off-diagonals (nu).
enum class MaskKind { eta, mu, nu };

namespace detail {

inline std::vector<Index> atom_blocks(const BlockStructure& structure) {
  std::vector<Index> owner(static_cast<std::size_t>(structure.num_atoms()));
  for (Index j = 0; j < structure.num_blocks(); ++j) {
    for (Index m = 0; m < structure.size(j); ++m) {
      owner[static_cast<std::size_t>(structure.offset(j) + m)] = j;
    }
  }
  return owner;
}

template <typename Derived>
void check_square(const Eigen::MatrixBase<Derived>& g, const BlockStructure& structure,
                  const char* what) {
  if (g.rows() != g.cols() || g.rows() != structure.num_atoms()) {
    throw DimensionError(std::string(what) + ": matrix is not K x K for the block structure");
  }
}

template <typename Scalar>
void check_alpha(Scalar alpha, const char* what) {
  if (!(alpha > Scalar(0) && alpha < Scalar(1))) {
    throw DomainError(std::string(what) + ": alpha must lie strictly between 0 and 1");
  }
}

}  // namespace detail

/// Mutual coherence: max over i != j of |E_i'E_j| / (|E_i| |E_j|).
template <typename Derived>
typename Derived::Scalar mu(const Eigen::MatrixBase<Derived>& e) {
  using Scalar = typename Derived::Scalar;
  if (e.cols() < 2) {
    throw DomainError("mu: at least two columns are required");
  }
  const Vec<Scalar> norms = e.colwise().norm().transpose();
  if ((norms.array() == Scalar(0)).any()) {
    throw DomainError("mu: equivalent dictionary has a zero column");
  }
  const Mat<Scalar> normalized = e * norms.cwiseInverse().asDiagonal();
  Mat<Scalar> g = (normalized.transpose() * normalized).cwiseAbs();
  g.diagonal().setZero();
  return std::min(g.maxCoeff(), Scalar(1));
}

/// Inter-block coherence max_{i != j} sigma_max(G[i,j]) / s; fixed block size only.
template <typename Derived>
typename Derived::Scalar mu_block(const Eigen::MatrixBase<Derived>& g,
                                  const BlockStructure& structure) {
  using Scalar = typename Derived::Scalar;
  detail::check_square(g, structure, "mu_block");
  const Index s = structure.uniform_size();
  if (structure.num_blocks() < 2) {
    throw DomainError("mu_block: at least two blocks are required");
  }
  Scalar best = 0;
  for (Index i = 0; i < structure.num_blocks(); ++i) {
    for (Index j = 0; j < structure.num_blocks(); ++j) {
      if (i == j) continue;
      const Mat<Scalar> cross = g.block(structure.offset(i), structure.offset(j), s, s);
      Eigen::JacobiSVD<Mat<Scalar>> svd(cross);
      best = std::max(best, svd.singularValues()(0));
    }
  }
  return best / Scalar(s);
}

/// Sub-block coherence: largest |off-diagonal| inside any diagonal block.
template <typename Derived>
typename Derived::Scalar nu_sub(const Eigen::MatrixBase<Derived>& g,
                                const BlockStructure& structure) {
  using Scalar = typename Derived::Scalar;
  detail::check_square(g, structure, "nu_sub");
  Scalar best = 0;
  for (Index j = 0; j < structure.num_blocks(); ++j) {
    const Index o = structure.offset(j);
    for (Index c = 0; c < structure.size(j); ++c) {
      for (Index r = 0; r < structure.size(j); ++r) {
        if (r != c) best = std::max(best, std::abs(g(o + r, o + c)));
      }
    }
  }
  return best;
}

/// Total inter-block coherence: sum of squared entries outside the diagonal blocks.
template <typename Derived>
typename Derived::Scalar total_inter(const Eigen::MatrixBase<Derived>& g,
                                     const BlockStructure& structure) {
  using Scalar = typename Derived::Scalar;
  detail::check_square(g, structure, "total_inter");
  Scalar sum = 0;
  for (Index j = 0; j < structure.num_blocks(); ++j) {
    for (Index i = 0; i < structure.num_blocks(); ++i) {
      if (i == j) continue;
      sum += g.block(structure.offset(i), structure.offset(j), structure.size(i),
                     structure.size(j))
                 .squaredNorm();
    }
  }
  return sum;
}

/// Total sub-block coherence: sum of squared off-diagonal entries of the diagonal blocks.
template <typename Derived>
typename Derived::Scalar total_sub(const Eigen::MatrixBase<Derived>& g,
                                   const BlockStructure& structure) {
  using Scalar = typename Derived::Scalar;
  detail::check_square(g, structure, "total_sub");
  Scalar sum = 0;
  for (Index j = 0; j < structure.num_blocks(); ++j) {
    const Index o = structure.offset(j);
    for (Index c = 0; c < structure.size(j); ++c) {
      for (Index r = 0; r < structure.size(j); ++r) {
        if (r != c) sum += g(o + r, o + c) * g(o + r, o + c);
      }
    }
  }
  return sum;
}

/// Normalization penalty: sum of (G_mm - 1)^2.
template <typename Derived>
typename Derived::Scalar norm_penalty(const Eigen::MatrixBase<Derived>& g,
                                      const BlockStructure& structure) {
  using Scalar = typename Derived::Scalar;
  detail::check_square(g, structure, "norm_penalty");
  return (g.diagonal().array() - Scalar(1)).square().sum();
}

/// f(G) = eta/2 + (1 - alpha) total_inter + alpha total_sub.
template <typename Derived>
typename Derived::Scalar objective(const Eigen::MatrixBase<Derived>& g,
                                   const BlockStructure& structure,
                                   typename Derived::Scalar alpha) {
  using Scalar = typename Derived::Scalar;
  detail::check_alpha(alpha, "objective");
  return Scalar(0.5) * norm_penalty(g, structure) +
         (Scalar(1) - alpha) * total_inter(g, structure) + alpha * total_sub(g, structure);
}

/**
 * Masking operator u_kind: keeps the part of G penalized by that term.
 *
 *   eta: diagonal minus one, zero elsewhere
 *   mu:  cross-block entries, zero elsewhere
 *   nu:  within-block off-diagonal entries, zero elsewhere
 */
template <typename Derived>
Mat<typename Derived::Scalar> mask_u(const Eigen::MatrixBase<Derived>& g,
                                     const BlockStructure& structure, MaskKind kind) {
  using Scalar = typename Derived::Scalar;
  detail::check_square(g, structure, "mask_u");
  const auto owner = detail::atom_blocks(structure);
  const Index k = g.rows();
  Mat<Scalar> out = Mat<Scalar>::Zero(k, k);
  for (Index c = 0; c < k; ++c) {
    for (Index r = 0; r < k; ++r) {
      const bool same = owner[static_cast<std::size_t>(r)] == owner[static_cast<std::size_t>(c)];
      switch (kind) {
        case MaskKind::eta:
          if (r == c) out(r, c) = g(r, c) - Scalar(1);
          break;
        case MaskKind::mu:
          if (!same) out(r, c) = g(r, c);
          break;
        case MaskKind::nu:
          if (same && r != c) out(r, c) = g(r, c);
          break;
      }
    }
  }
  return out;
}

/// h_kind(G) = G - u_kind(G): G with the penalized part moved to its target.
template <typename Derived>
Mat<typename Derived::Scalar> mask_h(const Eigen::MatrixBase<Derived>& g,
                                     const BlockStructure& structure, MaskKind kind) {
  using Scalar = typename Derived::Scalar;
  detail::check_square(g, structure, "mask_h");
  const auto owner = detail::atom_blocks(structure);
  const Index k = g.rows();
  Mat<Scalar> out = g;
  for (Index c = 0; c < k; ++c) {
    for (Index r = 0; r < k; ++r) {
      const bool same = owner[static_cast<std::size_t>(r)] == owner[static_cast<std::size_t>(c)];
      switch (kind) {
        case MaskKind::eta:
          if (r == c) out(r, c) = Scalar(1);
          break;
        case MaskKind::mu:
          if (!same) out(r, c) = Scalar(0);
          break;
        case MaskKind::nu:
          if (same && r != c) out(r, c) = Scalar(0);
          break;
      }
    }
  }
  return out;
}

/// Gradient of f with respect to the entries of G: 2[u_eta/2 + (1-alpha) u_mu + alpha u_nu].
template <typename Derived>
Mat<typename Derived::Scalar> objective_gradient(const Eigen::MatrixBase<Derived>& g,
                                                 const BlockStructure& structure,
                                                 typename Derived::Scalar alpha) {
  using Scalar = typename Derived::Scalar;
  detail::check_alpha(alpha, "objective_gradient");
  return Scalar(2) * (Scalar(0.5) * mask_u(g, structure, MaskKind::eta) +
                      (Scalar(1) - alpha) * mask_u(g, structure, MaskKind::mu) +
                      alpha * mask_u(g, structure, MaskKind::nu));
}

// GramParts overloads.

template <typename Scalar>
Scalar mu_block(const GramParts<Scalar>& g) { return mu_block(g.matrix(), g.structure()); }
template <typename Scalar>
Scalar nu_sub(const GramParts<Scalar>& g) { return nu_sub(g.matrix(), g.structure()); }
template <typename Scalar>
Scalar total_inter(const GramParts<Scalar>& g) { return total_inter(g.matrix(), g.structure()); }
template <typename Scalar>
Scalar total_sub(const GramParts<Scalar>& g) { return total_sub(g.matrix(), g.structure()); }
template <typename Scalar>
Scalar norm_penalty(const GramParts<Scalar>& g) { return norm_penalty(g.matrix(), g.structure()); }
template <typename Scalar>
Scalar objective(const GramParts<Scalar>& g, Scalar alpha) {
  return objective(g.matrix(), g.structure(), alpha);
}
template <typename Scalar>
Mat<Scalar> mask_u(const GramParts<Scalar>& g, MaskKind kind) {
  return mask_u(g.matrix(), g.structure(), kind);
}
template <typename Scalar>
Mat<Scalar> mask_h(const GramParts<Scalar>& g, MaskKind kind) {
  return mask_h(g.matrix(), g.structure(), kind);
}

/// Both sides of |E'E - I|_F^2 = eta + total_inter + total_sub.
template <typename Scalar>
struct DecompositionCheck {
  Scalar lhs;  // |E'E - I|_F^2 computed directly
  Scalar rhs;  // eta + total_inter + total_sub
};

template <typename Derived>
DecompositionCheck<typename Derived::Scalar> decomposition_check(
    const Eigen::MatrixBase<Derived>& e, const BlockStructure& structure) {
  using Scalar = typename Derived::Scalar;
  const Index k = e.cols();
  const Scalar lhs =
      (e.transpose() * e - Mat<Scalar>::Identity(k, k)).squaredNorm();
  const auto g = gram(e, structure);
  return {lhs, norm_penalty(g) + total_inter(g) + total_sub(g)};
}

/// Right-hand side of the sparse recovery condition |theta|_0 <= (1 + 1/mu)/2.
template <typename Scalar>
Scalar bound_sparse(Scalar mu_value) {
  if (!(mu_value > Scalar(0))) {
    throw DomainError("bound_sparse: mu must be positive");
  }
  return Scalar(0.5) * (Scalar(1) + Scalar(1) / mu_value);
}

/// Right-hand side of the block recovery condition
/// |theta|_{2,0} < (1/2s)(1/mu_B + s - (s-1) nu/mu_B).
template <typename Scalar>
Scalar bound_block(Scalar mu_block_value, Scalar nu_value, Index s) {
  if (!(mu_block_value > Scalar(0))) {
    throw DomainError("bound_block: mu_block must be positive");
  }
  if (s < 1) {
    throw DomainError("bound_block: block size must be at least 1");
  }
  const Scalar size = static_cast<Scalar>(s);
  return (Scalar(1) / (Scalar(2) * size)) *
         (Scalar(1) / mu_block_value + size - (size - Scalar(1)) * nu_value / mu_block_value);
}

/// Coherence summary of an equivalent dictionary.
template <typename Scalar>
struct CoherenceReport {
  std::optional<Scalar> mu;        // absent when E has a zero column
  std::optional<Scalar> mu_block;  // absent for mixed block sizes or a single block
  Scalar nu_sub = 0;
  Scalar total_inter = 0;
  Scalar total_sub = 0;
  Scalar norm_penalty = 0;
  std::optional<Scalar> objective_alpha;
};

template <typename Derived>
CoherenceReport<typename Derived::Scalar> coherence_report(
    const Eigen::MatrixBase<Derived>& e, const BlockStructure& structure,
    std::optional<typename Derived::Scalar> alpha = std::nullopt) {
  using Scalar = typename Derived::Scalar;
  const auto g = gram(e, structure);
  CoherenceReport<Scalar> report;
  if (e.cols() >= 2 && (e.colwise().squaredNorm().array() > Scalar(0)).all()) {
    report.mu = mu(e);
  }
  if (structure.is_uniform() && structure.num_blocks() >= 2) {
    report.mu_block = mu_block(g);
  }
  report.nu_sub = nu_sub(g);
  report.total_inter = total_inter(g);
  report.total_sub = total_sub(g);
  report.norm_penalty = norm_penalty(g);
  if (alpha) {
    report.objective_alpha = objective(g, *alpha);
  }
  return report;
}

}  // namespace wcm

#endif  // WCM_COHERENCE_HPP
