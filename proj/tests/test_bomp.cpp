#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "wcm/bomp.hpp"
#include "wcm/coherence.hpp"

using namespace wcm;
using oracle::Matrix;
using oracle::Vector;

namespace {

struct Instance {
  Matrix e;
  Vector y;
  std::vector<Index> support;
};

// y = E theta with exactly k active blocks and U[-1,1] coefficients.
Instance make_instance(Matrix e, Index s, Index k, std::mt19937_64& rng) {
  const Index blocks = e.cols() / s;
  std::vector<Index> all(static_cast<std::size_t>(blocks));
  for (Index j = 0; j < blocks; ++j) all[static_cast<std::size_t>(j)] = j;
  std::shuffle(all.begin(), all.end(), rng);
  std::vector<Index> support(all.begin(), all.begin() + k);
  std::sort(support.begin(), support.end());
  std::uniform_real_distribution<double> u(-1, 1);
  Vector theta = Vector::Zero(e.cols());
  for (Index j : support)
    for (Index m = 0; m < s; ++m) theta(j * s + m) = u(rng);
  return {e, e * theta, support};
}

bool bound_holds(const Matrix& e, const BlockStructure& s, Index k) {
  const Matrix g = e.transpose() * e;
  const double mb = mu_block(g, s);
  return mb > 0 && static_cast<double>(k) < bound_block(mb, nu_sub(g, s), s.uniform_size());
}

}  // namespace

TEST_CASE("orthogonal blocks recover the single active block exactly") {
  std::mt19937_64 rng(61);
  const Matrix e = oracle::orthonormal(12, rng);
  const auto s = BlockStructure::uniform(3, 4);
  Vector c(3);
  c << 0.5, -1.25, 2.0;
  const Vector y = e.middleCols(6, 3) * c;
  BompConfig cfg;
  cfg.k_blocks = 1;
  const auto theta = bomp_decode(e, s, y, cfg);
  CHECK(theta.support() == std::vector<Index>{2});
  CHECK((theta.block(2) - c).norm() < 1e-12);
  CHECK(theta.values().head(6).isZero(0));
  CHECK(theta.values().tail(3).isZero(0));
}

TEST_CASE("zero measurements decode to zero coefficients") {
  std::mt19937_64 rng(62);
  const Matrix e = oracle::gaussian(14, 24, rng);
  BompConfig cfg;
  cfg.k_blocks = 2;
  const auto theta = bomp_decode(e, BlockStructure::uniform(3, 8), Vector::Zero(14), cfg);
  CHECK(theta.values().isZero(0));
  CHECK(theta.support().size() == 2);
  // All scores tie at zero, so the lowest indices win.
  CHECK(theta.support() == std::vector<Index>{0, 1});
}

TEST_CASE("residual is non-increasing and orthogonal to the selected columns") {
  std::mt19937_64 rng(63);
  const auto s = BlockStructure({2, 3, 1, 4, 2, 3});
  for (int t = 0; t < 50; ++t) {
    const Matrix e = oracle::gaussian(10, 15, rng);
    const Vector y = oracle::gaussian(10, 1, rng);
    BompConfig cfg;
    cfg.k_blocks = 3;
    std::vector<double> norms;
    const auto theta = bomp_decode(e, s, y, cfg, &norms);
    REQUIRE(norms.size() == 4);
    for (std::size_t i = 1; i < norms.size(); ++i) CHECK(norms[i] <= norms[i - 1] + 1e-12);
    CHECK(theta.support().size() == 3);

    const Vector r = y - e * theta.values();
    CHECK(std::abs(r.norm() - norms.back()) <= 1e-12 * y.norm());
    for (Index j : theta.support()) {
      CHECK((e.middleCols(s.offset(j), s.size(j)).transpose() * r).norm() <= 1e-8 * y.norm());
    }
    std::vector<Index> sizes = s.sizes();
    CHECK(std::abs(r.norm() - oracle::support_residual(e, sizes, theta.support(), y)) <=
          1e-10 * y.norm());
  }
}

TEST_CASE("greedy selection follows the block correlation rule") {
  // Block 1 is aligned with y; block 0 only partially.
  Matrix e = Matrix::Zero(3, 4);
  e(0, 0) = 1;
  e(1, 1) = 1;
  e(0, 2) = 1;
  e(2, 3) = 1;
  Vector y(3);
  y << 2, 1, 0;
  BompConfig cfg;
  const auto theta = bomp_decode(e, BlockStructure({2, 2}), y, cfg);
  CHECK(theta.support() == std::vector<Index>{0});
}

TEST_CASE("random k=2, B=8, s=3, M=14 instances match the exhaustive oracle") {
  std::mt19937_64 rng(64);
  const auto s = BlockStructure::uniform(3, 8);
  const std::vector<Index> sizes(8, 3);
  BompConfig cfg;
  cfg.k_blocks = 2;
  int agree = 0;
  for (int t = 0; t < 100; ++t) {
    const auto inst = make_instance(oracle::unit_columns(oracle::gaussian(14, 24, rng)), 3, 2, rng);
    const auto theta = bomp_decode(inst.e, s, inst.y, cfg);
    const auto best = oracle::exhaustive_support(inst.e, sizes, 2, inst.y);
    CHECK(best == inst.support);  // the noiseless oracle always finds the truth
    if (theta.support() == best) ++agree;
  }
  // Without the bound, BOMP is not guaranteed; it should still usually succeed.
  CHECK(agree >= 80);
}

TEST_CASE("exact support recovery when the block coherence bound holds") {
  std::mt19937_64 rng(65);
  const auto s = BlockStructure::uniform(3, 4);
  const std::vector<Index> sizes(4, 3);
  BompConfig cfg;
  cfg.k_blocks = 2;
  int qualifying = 0;
  for (int t = 0; t < 100; ++t) {
    // Near-orthonormal columns: small block coherence and sub-coherence.
    const Matrix q = oracle::orthonormal(14, rng).leftCols(12);
    const Matrix e = oracle::unit_columns(q + 0.01 * oracle::gaussian(14, 12, rng));
    if (!bound_holds(e, s, 2)) continue;
    ++qualifying;
    const auto inst = make_instance(e, 3, 2, rng);
    const auto theta = bomp_decode(inst.e, s, inst.y, cfg);
    CHECK(theta.support() == inst.support);
    CHECK(theta.support() == oracle::exhaustive_support(inst.e, sizes, 2, inst.y));
  }
  CHECK(qualifying >= 90);
}

TEST_CASE("decode_all decodes column by column") {
  std::mt19937_64 rng(66);
  const EquivDict<double> e{oracle::gaussian(8, 12, rng), BlockStructure::uniform(3, 4)};
  const Matrix y = oracle::gaussian(8, 5, rng);
  BompConfig cfg;
  cfg.k_blocks = 2;
  const Matrix all = bomp_decode_all(e, y, cfg);
  REQUIRE(all.rows() == 12);
  REQUIRE(all.cols() == 5);
  for (Index c = 0; c < 5; ++c) CHECK(all.col(c) == bomp_decode(e, y.col(c), cfg).values());
}

TEST_CASE("bomp_decode errors") {
  std::mt19937_64 rng(67);
  const auto s = BlockStructure::uniform(2, 3);
  const Matrix e = oracle::gaussian(5, 6, rng);
  BompConfig cfg;
  cfg.k_blocks = 0;
  CHECK_THROWS_AS(bomp_decode(e, s, Vector::Ones(5), cfg), DomainError);
  cfg.k_blocks = 4;
  CHECK_THROWS_AS(bomp_decode(e, s, Vector::Ones(5), cfg), DomainError);
  cfg.k_blocks = 1;
  CHECK_THROWS_AS(bomp_decode(e, s, Vector::Ones(4), cfg), DimensionError);
  CHECK_THROWS_AS(bomp_decode(e, BlockStructure::uniform(2, 2), Vector::Ones(5), cfg),
                  DimensionError);

  // Block 1 holds two copies of the only column aligned with y.
  Matrix dup = Matrix::Zero(5, 6);
  dup(1, 0) = dup(2, 1) = dup(0, 2) = dup(0, 3) = dup(3, 4) = dup(4, 5) = 1;
  const Vector y = 3.0 * Vector::Unit(5, 0);
  try {
    bomp_decode(dup, s, y, cfg);
    FAIL("expected RankDeficientError");
  } catch (const RankDeficientError& err) {
    CHECK(std::string(err.what()).find("{1}") != std::string::npos);
  }
}
