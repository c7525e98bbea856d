#include "cnt/dense.hpp"
#include "cnt/probgen.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace cnt;

namespace {

Matrix random_matrix(Index m, Index n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix A(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) A(i, j) = rng.normal();
  return A;
}

}  // namespace

TEST(SensingMatrix, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(SensingMatrix(Matrix(0, 3)), std::invalid_argument);
  Matrix A = Matrix::Ones(2, 2);
  A(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(SensingMatrix{A}, std::invalid_argument);
  A(1, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(SensingMatrix{A}, std::invalid_argument);
}

TEST(SupportSet, RequiresSortedUniqueInRange) {
  EXPECT_NO_THROW(SupportSet({0, 2, 5}, 6));
  EXPECT_THROW(SupportSet({2, 1}, 6), std::invalid_argument);
  EXPECT_THROW(SupportSet({1, 1}, 6), std::invalid_argument);
  EXPECT_THROW(SupportSet({6}, 6), std::invalid_argument);
  EXPECT_EQ(SupportSet::from_unsorted({4, 1, 4}, 6), SupportSet({1, 4}, 6));
  EXPECT_EQ(set_union(SupportSet({0, 3}, 5), SupportSet({1, 3}, 5), 5), SupportSet({0, 1, 3}, 5));
}

TEST(Matvec, IdentityAndZero) {
  const SensingMatrix I(Matrix::Identity(2, 2));
  Vector x(2);
  x << 3, -1;
  EXPECT_EQ(matvec(I, x), x);
  const SensingMatrix A(random_matrix(3, 4, 1));
  EXPECT_EQ(matvec(A, Vector::Zero(4)), Vector::Zero(3));
  EXPECT_THROW(matvec(A, Vector::Zero(3)), std::invalid_argument);
}

TEST(Matvec, MatchesLoopOracle) {
  const Matrix M = random_matrix(4, 6, 2);
  Rng rng(3);
  Vector x(6);
  for (Index i = 0; i < 6; ++i) x[i] = rng.normal();
  const Vector got = matvec(SensingMatrix(M), x);
  EXPECT_LE((got - oracle::matvec(M, x)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(GramOnSupport, OrthonormalSingleAndOracle) {
  const SensingMatrix I(Matrix::Identity(5, 5));
  EXPECT_TRUE(gram_on_support(I, SupportSet({0, 2, 4}, 5)).isApprox(Matrix::Identity(3, 3)));

  const Matrix M = random_matrix(8, 16, 4);
  const SensingMatrix A(M);
  const Matrix g1 = gram_on_support(A, SupportSet({7}, 16));
  ASSERT_EQ(g1.rows(), 1);
  EXPECT_NEAR(g1(0, 0), M.col(7).squaredNorm(), 1e-13);

  const std::vector<Index> S = {1, 5, 9, 14};
  const Matrix G = gram_on_support(A, SupportSet(S, 16));
  EXPECT_LE((G - oracle::gram(M, S)).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_EQ(G, G.transpose());

  EXPECT_THROW(gram_on_support(A, SupportSet({}, 16)), std::invalid_argument);
}

TEST(Cholesky, IdentityAndHandExample) {
  const auto F = cholesky_spd(Matrix::Identity(3, 3));
  EXPECT_TRUE(F.lower.isApprox(Matrix::Identity(3, 3)));
  EXPECT_EQ(F.ridge_applied, 0.0);

  Matrix G(2, 2);
  G << 4, 2, 2, 2;
  const auto F2 = cholesky_spd(G);
  Matrix L(2, 2);
  L << 2, 0, 1, 1;
  EXPECT_LE((F2.lower - L).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(F2.ridge_applied, 0.0);
  EXPECT_LE((F2.lower * F2.lower.transpose() - G).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Cholesky, RankOneNeedsRidge) {
  Matrix G(2, 2);
  G << 1, 1, 1, 1;
  const auto F = cholesky_spd(G);
  EXPECT_DOUBLE_EQ(F.ridge_applied, 1e-10 * (2.0 / 2.0));
}

TEST(Cholesky, HopelessMatrixThrows) {
  Matrix G(2, 2);
  G << 1, 0, 0, -1;
  EXPECT_THROW(cholesky_spd(G), SingularGramError);
  EXPECT_THROW(cholesky_spd(Matrix::Zero(3, 3)), SingularGramError);
}

TEST(SolveSpd, Examples) {
  Vector b(3);
  b << 1, -2, 7;
  EXPECT_TRUE(solve_spd(cholesky_spd(Matrix::Identity(3, 3)), b).isApprox(b));

  Matrix G(2, 2);
  G << 4, 2, 2, 2;
  Vector b2(2);
  b2 << 6, 4;
  const Vector z = solve_spd(cholesky_spd(G), b2);
  EXPECT_NEAR(z[0], 1.0, 1e-14);
  EXPECT_NEAR(z[1], 1.0, 1e-14);

  const Matrix R = random_matrix(6, 6, 5);
  const Matrix S = R.transpose() * R + Matrix::Identity(6, 6);
  Vector b6 = random_matrix(6, 1, 6);
  const Vector z6 = solve_spd(cholesky_spd(S), b6);
  EXPECT_LE((S * z6 - b6).norm() / b6.norm(), 1e-10);
}

TEST(LeastSquares, ConsistentSystemAndQrOracle) {
  const Matrix M = random_matrix(20, 50, 7);
  const SensingMatrix A(M);
  const std::vector<Index> S = {3, 11, 12, 30, 41, 49};
  Vector xs = Vector::Zero(50);
  for (Index i : S) xs[i] = 1.0 + static_cast<double>(i) / 10.0;
  const Vector y = M * xs;
  const Vector z = least_squares_on_support(A, y, SupportSet(S, 50));
  EXPECT_LE((z - xs).norm(), 1e-10);

  Vector y2 = random_matrix(20, 1, 8);
  const Vector z2 = least_squares_on_support(A, y2, SupportSet(S, 50));
  const Vector o2 = oracle::least_squares_qr(M, y2, S);
  EXPECT_NEAR((y2 - M * z2).squaredNorm(), (y2 - M * o2).squaredNorm(), 1e-9);
  for (Index i = 0; i < 50; ++i) {
    if (!SupportSet(S, 50).contains(i)) {
      EXPECT_EQ(z2[i], 0.0);
    }
  }
}

TEST(SpectralNorm, IdentityDiagonalAndSvdOracle) {
  EXPECT_NEAR(spectral_norm_sq(Matrix::Identity(4, 4), 1e-8, 1000), 1.0, 1e-8);
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 3;
  D(1, 1) = 1;
  EXPECT_NEAR(spectral_norm_sq(D, 1e-8, 1000), 9.0, 1e-6);
  const Matrix B = random_matrix(10, 20, 9);
  const double ref = oracle::spectral_norm_sq(B);
  EXPECT_NEAR(spectral_norm_sq(SensingMatrix(B), 1e-10, 5000) / ref, 1.0, 1e-4);
}

TEST(CappedSimplex, Examples) {
  Vector v(3);
  v << 2, 0.5, -1;
  const Vector w = project_capped_simplex(v, 1);
  EXPECT_NEAR(w[0], 1.0, 1e-12);
  EXPECT_NEAR(w[1], 0.0, 1e-12);
  EXPECT_NEAR(w[2], 0.0, 1e-12);

  Vector f(2);
  f << 0.5, 0.5;
  EXPECT_LE((project_capped_simplex(f, 1) - f).cwiseAbs().maxCoeff(), 1e-12);

  EXPECT_EQ(project_capped_simplex(v, 3), Vector::Ones(3));
  EXPECT_THROW(project_capped_simplex(v, 4), std::invalid_argument);
  EXPECT_THROW(project_capped_simplex(v, 0), std::invalid_argument);
}

TEST(CappedSimplex, MatchesGridOracleAndIsFeasible) {
  Rng rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.below(12));
    const Index k = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = 3.0 * rng.normal();
    const Vector w = project_capped_simplex(v, k);
    EXPECT_NEAR(w.sum(), static_cast<double>(k), 1e-12 * static_cast<double>(n) + 1e-12);
    EXPECT_GE(w.minCoeff(), 0.0);
    EXPECT_LE(w.maxCoeff(), 1.0);
    EXPECT_LE((w - oracle::capped_simplex_grid(v, k)).cwiseAbs().maxCoeff(), 1e-6);
  }
}
