#ifndef WCM_WCM_OPTIMIZER_HPP
#define WCM_WCM_OPTIMIZER_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "wcm/block_model.hpp"
#include "wcm/coherence.hpp"
#include "wcm/ds_designer.hpp"

// Weighted coherence minimization.
//
// Minimizes f(G) = eta/2 + (1 - alpha) total_inter + alpha total_sub over
// G = D'A'AD by bound optimization. Each step replaces f by the surrogate
//
//   g(G, G_prev) = 1/2 |G - h_eta(G_prev)|^2 + (1 - alpha) |G - h_mu(G_prev)|^2
//                + alpha |G - h_nu(G_prev)|^2,
//
// which touches f at G_prev, lies above it everywhere and shares its
// gradient there. Up to a constant g equals 3/2 |G - h_t(G_prev)|^2, so its
// minimizer over rank-M Gram matrices in the row space of D is read off the
// top M eigenpairs of the whitened target Lambda^{-1/2} U' D h_t D' U Lambda^{-1/2}.

namespace wcm {

enum class WcmInit { ds, random };

template <typename Scalar>
struct WcmConfig {
  Scalar alpha = Scalar(0.5);
  int max_iters = 1000;
  Scalar rel_tol = Scalar(1e-8);
  WcmInit init = WcmInit::ds;
  std::uint64_t seed = 0;  // used by WcmInit::random

  void validate() const {
    detail::check_alpha(alpha, "WcmConfig");
    if (max_iters < 1) throw DomainError("WcmConfig: max_iters must be positive");
    if (!(rel_tol > Scalar(0))) throw DomainError("WcmConfig: rel_tol must be positive");
  }
};

/// Objective terms of one iterate.
template <typename Scalar>
struct TracePoint {
  Scalar f;
  Scalar total_inter;
  Scalar total_sub;
  Scalar norm_penalty;
};

template <typename Scalar>
struct WcmReport {
  SensingMatrix<Scalar> sensing;
  std::vector<TracePoint<Scalar>> trace;  // trace[n] describes A^(n)
  int iterations = 0;
  bool converged = false;
  CoherenceReport<Scalar> final_report;

  std::vector<Scalar> objective_trace() const {
    std::vector<Scalar> out;
    out.reserve(trace.size());
    for (const auto& p : trace) out.push_back(p.f);
    return out;
  }
  Scalar final_objective() const { return trace.back().f; }
};

/// h_t(G) = (2/3)(h_eta(G)/2 + (1 - alpha) h_mu(G) + alpha h_nu(G)), entrywise.
template <typename Derived>
Mat<typename Derived::Scalar> h_t(const Eigen::MatrixBase<Derived>& g,
                                  const BlockStructure& structure,
                                  typename Derived::Scalar alpha) {
  using Scalar = typename Derived::Scalar;
  detail::check_alpha(alpha, "h_t");
  detail::check_square(g, structure, "h_t");
  const Scalar two_thirds = Scalar(2) / Scalar(3);
  // Cross-block entries survive h_eta and h_nu, within-block off-diagonals
  // survive h_eta and h_mu, the diagonal is 1 under h_eta.
  Mat<Scalar> out = (two_thirds * (Scalar(0.5) + alpha)) * g;
  for (Index j = 0; j < structure.num_blocks(); ++j) {
    const Index o = structure.offset(j);
    const Index s = structure.size(j);
    out.block(o, o, s, s) = (two_thirds * (Scalar(1.5) - alpha)) * g.block(o, o, s, s);
  }
  for (Index m = 0; m < g.rows(); ++m) {
    out(m, m) = two_thirds * (Scalar(0.5) + g(m, m));
  }
  return out;
}

template <typename Scalar>
Mat<Scalar> h_t(const GramParts<Scalar>& g, Scalar alpha) {
  return h_t(g.matrix(), g.structure(), alpha);
}

/// Surrogate g(G, G_prev).
template <typename DerivedG, typename DerivedP>
typename DerivedG::Scalar surrogate_g(const Eigen::MatrixBase<DerivedG>& g,
                                      const Eigen::MatrixBase<DerivedP>& g_prev,
                                      const BlockStructure& structure,
                                      typename DerivedG::Scalar alpha) {
  using Scalar = typename DerivedG::Scalar;
  detail::check_alpha(alpha, "surrogate_g");
  detail::check_square(g, structure, "surrogate_g");
  detail::check_square(g_prev, structure, "surrogate_g");
  return Scalar(0.5) * (g - mask_h(g_prev, structure, MaskKind::eta)).squaredNorm() +
         (Scalar(1) - alpha) * (g - mask_h(g_prev, structure, MaskKind::mu)).squaredNorm() +
         alpha * (g - mask_h(g_prev, structure, MaskKind::nu)).squaredNorm();
}

template <typename Scalar>
Scalar surrogate_g(const GramParts<Scalar>& g, const GramParts<Scalar>& g_prev, Scalar alpha) {
  if (!(g.structure() == g_prev.structure())) {
    throw DimensionError("surrogate_g: block structures differ");
  }
  return surrogate_g(g.matrix(), g_prev.matrix(), g.structure(), alpha);
}

/// Gradient of g(., G_prev) at G.
template <typename DerivedG, typename DerivedP>
Mat<typename DerivedG::Scalar> surrogate_gradient(const Eigen::MatrixBase<DerivedG>& g,
                                                  const Eigen::MatrixBase<DerivedP>& g_prev,
                                                  const BlockStructure& structure,
                                                  typename DerivedG::Scalar alpha) {
  using Scalar = typename DerivedG::Scalar;
  detail::check_alpha(alpha, "surrogate_gradient");
  return Scalar(2) * (Scalar(0.5) * (g - mask_h(g_prev, structure, MaskKind::eta)) +
                      (Scalar(1) - alpha) * (g - mask_h(g_prev, structure, MaskKind::mu)) +
                      alpha * (g - mask_h(g_prev, structure, MaskKind::nu)));
}

/**
 * Per-dictionary state for repeated surrogate minimization: the whitener
 * Lambda^{-1/2} U' and the whitened dictionary, whose rows are orthonormal.
 */
template <typename Scalar>
class WcmStepper {
 public:
  explicit WcmStepper(const Dict<Scalar>& d)
      : dict_(&d), whitener_(d.whitener()), whitened_(whitener_ * d.matrix()) {}

  /// Closed-form minimizer of g(., D'A_prev'A_prev D) with M = A_prev.rows().
  SensingMatrix<Scalar> step(const SensingMatrix<Scalar>& a_prev, Scalar alpha) const {
    if (a_prev.cols() != dict_->rows()) {
      throw DimensionError("wcm_step: sensing matrix and dictionary do not conform");
    }
    const auto g_prev = gram(a_prev, *dict_);
    return step_from_gram(g_prev.matrix(), a_prev.rows(), alpha);
  }

  SensingMatrix<Scalar> step_from_gram(const Mat<Scalar>& g_prev, Index m, Scalar alpha) const {
    const Mat<Scalar> target = h_t(g_prev, dict_->structure(), alpha);
    Mat<Scalar> whitened_target = whitened_ * target * whitened_.transpose();
    whitened_target = ((whitened_target + whitened_target.transpose()) / Scalar(2)).eval();
    const auto eig = sym_eig(whitened_target);
    // Negative eigenvalues cannot be matched by a PSD Gram matrix.
    const Vec<Scalar> scale = eig.values.head(m).cwiseMax(Scalar(0)).cwiseSqrt();
    Mat<Scalar> a = scale.asDiagonal() * eig.vectors.leftCols(m).transpose() * whitener_;
    return SensingMatrix<Scalar>(std::move(a));
  }

  const Dict<Scalar>& dict() const { return *dict_; }

 private:
  const Dict<Scalar>* dict_;
  Mat<Scalar> whitener_;
  Mat<Scalar> whitened_;
};

template <typename Scalar>
SensingMatrix<Scalar> wcm_step(const SensingMatrix<Scalar>& a_prev, const Dict<Scalar>& d,
                               Scalar alpha) {
  return WcmStepper<Scalar>(d).step(a_prev, alpha);
}

/// M x N matrix of i.i.d. standard normal entries.
template <typename Scalar, typename Rng>
Mat<Scalar> gaussian_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<Scalar> normal(Scalar(0), Scalar(1));
  Mat<Scalar> out(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) out(r, c) = normal(rng);
  }
  return out;
}

namespace detail {

template <typename Scalar>
TracePoint<Scalar> trace_point(const GramParts<Scalar>& g, Scalar alpha) {
  TracePoint<Scalar> p;
  p.total_inter = total_inter(g);
  p.total_sub = total_sub(g);
  p.norm_penalty = norm_penalty(g);
  p.f = Scalar(0.5) * p.norm_penalty + (Scalar(1) - alpha) * p.total_inter + alpha * p.total_sub;
  return p;
}

}  // namespace detail

/**
 * Iterates the surrogate minimizer from `initial` until the objective change
 * satisfies |f_n - f_{n+1}| <= rel_tol (1 + f_n) or max_iters steps are taken.
 * cfg.init is ignored; the given matrix is the starting point.
 */
template <typename Scalar>
WcmReport<Scalar> run_wcm(const Dict<Scalar>& d, SensingMatrix<Scalar> initial,
                          const WcmConfig<Scalar>& cfg) {
  cfg.validate();
  if (initial.cols() != d.rows()) {
    throw DimensionError("run_wcm: initial sensing matrix does not conform to D");
  }
  const WcmStepper<Scalar> stepper(d);
  const Index m = initial.rows();

  SensingMatrix<Scalar> current = std::move(initial);
  auto g = gram(current, d);
  std::vector<TracePoint<Scalar>> trace{detail::trace_point(g, cfg.alpha)};
  int iterations = 0;
  bool converged = false;
  while (iterations < cfg.max_iters) {
    SensingMatrix<Scalar> next = stepper.step_from_gram(g.matrix(), m, cfg.alpha);
    auto g_next = gram(next, d);
    const auto point = detail::trace_point(g_next, cfg.alpha);
    const Scalar f_prev = trace.back().f;
    trace.push_back(point);
    current = std::move(next);
    g = std::move(g_next);
    ++iterations;
    if (std::abs(f_prev - point.f) <= cfg.rel_tol * (Scalar(1) + f_prev)) {
      converged = true;
      break;
    }
  }
  const auto e = equivalent_dictionary(current, d);
  auto report = coherence_report(e.matrix, e.structure, std::optional<Scalar>(cfg.alpha));
  return WcmReport<Scalar>{std::move(current), std::move(trace), iterations, converged,
                           std::move(report)};
}

/// Starts from the DS design or a seeded Gaussian matrix, per cfg.init.
template <typename Scalar>
WcmReport<Scalar> run_wcm(const Dict<Scalar>& d, Index m, const WcmConfig<Scalar>& cfg) {
  cfg.validate();
  if (m < 1 || m >= d.rows()) {
    throw DomainError("run_wcm: need 1 <= M < N, got M=" + std::to_string(m));
  }
  if (cfg.init == WcmInit::ds) {
    return run_wcm(d, design_ds(d, m), cfg);
  }
  std::mt19937_64 rng(cfg.seed);
  return run_wcm(d, SensingMatrix<Scalar>(gaussian_matrix<Scalar>(m, d.rows(), rng)), cfg);
}

}  // namespace wcm

#endif  // WCM_WCM_OPTIMIZER_HPP
