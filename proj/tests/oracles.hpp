// Test-only reference computations. Each one follows the textbook
// definition directly (loops, enumeration, finite differences) and shares no
// code path with the library routine it checks.

#ifndef WCM_TESTS_ORACLES_HPP
#define WCM_TESTS_ORACLES_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "wcm/block_model.hpp"

namespace oracle {

using wcm::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = n(rng);
  return m;
}

inline Matrix unit_columns(Matrix m) {
  for (Index c = 0; c < m.cols(); ++c) m.col(c) /= m.col(c).norm();
  return m;
}

/// Random orthonormal n x n matrix.
inline Matrix orthonormal(Index n, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(gaussian(n, n, rng));
  return qr.householderQ() * Matrix::Identity(n, n);
}

inline Matrix naive_product(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < b.cols(); ++j) {
      double s = 0;
      for (Index t = 0; t < a.cols(); ++t) s += a(i, t) * b(t, j);
      out(i, j) = s;
    }
  return out;
}

/// Block index of every atom, by walking the size list.
inline std::vector<Index> owners(const std::vector<Index>& sizes) {
  std::vector<Index> out;
  for (std::size_t j = 0; j < sizes.size(); ++j)
    for (Index m = 0; m < sizes[j]; ++m) out.push_back(static_cast<Index>(j));
  return out;
}

inline double pairwise_mu(const Matrix& e) {
  double best = 0;
  for (Index i = 0; i < e.cols(); ++i)
    for (Index j = 0; j < e.cols(); ++j) {
      if (i == j) continue;
      double dot = 0, ni = 0, nj = 0;
      for (Index r = 0; r < e.rows(); ++r) {
        dot += e(r, i) * e(r, j);
        ni += e(r, i) * e(r, i);
        nj += e(r, j) * e(r, j);
      }
      best = std::max(best, std::abs(dot) / std::sqrt(ni * nj));
    }
  return best;
}

/// max_{i != j} sqrt(lambda_max(G[i,j]'G[i,j])) / s via eigenvalues of B'B.
inline double mu_block_eig(const Matrix& g, Index s) {
  const Index blocks = g.rows() / s;
  double best = 0;
  for (Index i = 0; i < blocks; ++i)
    for (Index j = 0; j < blocks; ++j) {
      if (i == j) continue;
      Matrix b(s, s);
      for (Index r = 0; r < s; ++r)
        for (Index c = 0; c < s; ++c) b(r, c) = g(i * s + r, j * s + c);
      Eigen::SelfAdjointEigenSolver<Matrix> es(b.transpose() * b);
      best = std::max(best, std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff())));
    }
  return best / static_cast<double>(s);
}

struct Terms {
  double eta = 0, inter = 0, sub = 0, max_sub = 0;
};

/// Single scan over all K^2 entries, classifying each by block ownership.
inline Terms scan(const Matrix& g, const std::vector<Index>& sizes) {
  const auto own = owners(sizes);
  Terms t;
  for (Index r = 0; r < g.rows(); ++r)
    for (Index c = 0; c < g.cols(); ++c) {
      const double v = g(r, c);
      if (r == c) {
        t.eta += (v - 1) * (v - 1);
      } else if (own[r] == own[c]) {
        t.sub += v * v;
        t.max_sub = std::max(t.max_sub, std::abs(v));
      } else {
        t.inter += v * v;
      }
    }
  return t;
}

inline double objective(const Matrix& g, const std::vector<Index>& sizes, double alpha) {
  const auto t = scan(g, sizes);
  return 0.5 * t.eta + (1 - alpha) * t.inter + alpha * t.sub;
}

/// Central finite-difference gradient of a scalar function of a matrix,
/// perturbing one entry at a time.
inline Matrix fd_gradient(const std::function<double(const Matrix&)>& f, const Matrix& x,
                          double h = 1e-5) {
  Matrix grad(x.rows(), x.cols());
  Matrix probe = x;
  for (Index c = 0; c < x.cols(); ++c)
    for (Index r = 0; r < x.rows(); ++r) {
      const double keep = probe(r, c);
      probe(r, c) = keep + h;
      const double up = f(probe);
      probe(r, c) = keep - h;
      const double down = f(probe);
      probe(r, c) = keep;
      grad(r, c) = (up - down) / (2 * h);
    }
  return grad;
}

/// Least-squares residual norm of y on the columns of the given blocks.
inline double support_residual(const Matrix& e, const std::vector<Index>& sizes,
                               const std::vector<Index>& support, const Vector& y) {
  std::vector<Index> offsets{0};
  for (Index s : sizes) offsets.push_back(offsets.back() + s);
  Index width = 0;
  for (Index j : support) width += sizes[j];
  Matrix sub(e.rows(), width);
  Index col = 0;
  for (Index j : support)
    for (Index m = 0; m < sizes[j]; ++m) sub.col(col++) = e.col(offsets[j] + m);
  const Vector coef = sub.completeOrthogonalDecomposition().solve(y);
  return (y - sub * coef).norm();
}

/// Block support of size k minimizing the least-squares residual, by
/// enumerating every k-subset in lexicographic order.
inline std::vector<Index> exhaustive_support(const Matrix& e, const std::vector<Index>& sizes,
                                             Index k, const Vector& y) {
  const Index b = static_cast<Index>(sizes.size());
  std::vector<Index> pick(k);
  for (Index i = 0; i < k; ++i) pick[i] = i;
  std::vector<Index> best;
  double best_res = std::numeric_limits<double>::infinity();
  while (true) {
    const double res = support_residual(e, sizes, pick, y);
    if (res < best_res) {
      best_res = res;
      best = pick;
    }
    Index i = k - 1;
    while (i >= 0 && pick[i] == b - k + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (Index t = i + 1; t < k; ++t) pick[t] = pick[t - 1] + 1;
  }
  return best;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({1e-300, std::abs(a), std::abs(b)});
}

}  // namespace oracle

#endif  // WCM_TESTS_ORACLES_HPP
