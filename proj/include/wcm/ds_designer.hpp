#ifndef WCM_DS_DESIGNER_HPP
#define WCM_DS_DESIGNER_HPP

#include <string>

#include "wcm/block_model.hpp"

namespace wcm {

/**
 * Closed-form minimizer of |D'A'AD - I|_F^2 over M x N sensing matrices.
 *
 * With DD' = U Lambda U' (descending), returns A = [I_M 0] Lambda^{-1/2} U',
 * which gives ADD'A' = I_M and the objective value K - M. Rank deficiency of
 * D is caught when the Dict is built.
 */
template <typename Scalar>
SensingMatrix<Scalar> design_ds(const Dict<Scalar>& d, Index m) {
  if (m < 1 || m >= d.rows()) {
    throw DomainError("design_ds: need 1 <= M < N, got M=" + std::to_string(m) +
                      ", N=" + std::to_string(d.rows()));
  }
  return SensingMatrix<Scalar>(d.whitener().topRows(m));
}

/// |D'A'AD - I|_F^2.
template <typename DerivedA, typename DerivedD>
typename DerivedA::Scalar ds_objective(const Eigen::MatrixBase<DerivedA>& a,
                                       const Eigen::MatrixBase<DerivedD>& d) {
  using Scalar = typename DerivedA::Scalar;
  if (a.cols() != d.rows()) {
    throw DimensionError("ds_objective: A and D do not conform");
  }
  const Mat<Scalar> e = a * d;
  return (e.transpose() * e - Mat<Scalar>::Identity(d.cols(), d.cols())).squaredNorm();
}

template <typename Scalar>
Scalar ds_objective(const SensingMatrix<Scalar>& a, const Dict<Scalar>& d) {
  return ds_objective(a.matrix(), d.matrix());
}

}  // namespace wcm

#endif  // WCM_DS_DESIGNER_HPP
