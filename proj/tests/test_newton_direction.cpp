#include "cnt/newton_direction.hpp"
#include "cnt/probgen.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace cnt;

TEST(SelectSubspace, Examples) {
  Vector g(4);
  g << 0, 5, -7, 1;
  EXPECT_EQ(select_subspace(g, 2), SupportSet({1, 2}, 4));
  EXPECT_EQ(select_subspace(g, 4), SupportSet({0, 1, 2, 3}, 4));
  EXPECT_THROW(select_subspace(g, 0), std::invalid_argument);
  EXPECT_THROW(select_subspace(g, 5), std::invalid_argument);
}

TEST(Direction, ZeroResidual) {
  const SensingMatrix A = gen_matrix(GenSpec{6, 10, 1, MatrixKind::Gaussian, 0.0, 1});
  const Direction d = compressed_newton_direction(A, Vector::Zero(6), {3, 1.0, 0.1});
  EXPECT_EQ(d.d, Vector::Zero(10));
  EXPECT_EQ(d.gradient_inner, 0.0);
}

TEST(Direction, IdentityGramWithZeroGamma) {
  const SensingMatrix A(Matrix::Identity(6, 6));
  Vector r(6);
  r << 0.5, -4, 1, 3, -0.1, 2;
  const Direction d = compressed_newton_direction(A, r, {3, 1.0, 0.0});
  EXPECT_LE((d.d - hard_threshold(r, 3).entries).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Direction, MatchesDenseAssembly) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(s);
    const SensingMatrix A = gen_matrix(GenSpec{8, 24, 1, MatrixKind::Gaussian, 0.0, 1000 + s}, rng);
    Vector r(8);
    for (Index i = 0; i < 8; ++i) r[i] = rng.normal();
    const Direction d = compressed_newton_direction(A, r, {3, 1.0, 0.1});
    const Vector ref = oracle::dense_direction(A.data(), r, 3, 1.0, 0.1);
    EXPECT_LE((d.d - ref).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(d.gradient_inner, -d.gradient.dot(d.d), 1e-12);
    EXPECT_LT(d.gradient_inner, 0.0);
  }
}

TEST(Direction, AlphaGammaScaleOffSubspace) {
  const SensingMatrix A = gen_matrix(GenSpec{8, 12, 1, MatrixKind::Gaussian, 0.0, 3});
  Rng rng(4);
  Vector r(8);
  for (Index i = 0; i < 8; ++i) r[i] = rng.normal();
  const Direction d = compressed_newton_direction(A, r, {2, 2.0, 0.25});
  for (Index i = 0; i < 12; ++i) {
    if (!d.omega.contains(i)) {
      EXPECT_NEAR(d.d[i], 0.5 * d.gradient[i], 1e-15);
    }
  }
}

TEST(Direction, RankDeficientGramUsesRidge) {
  Matrix M = Matrix::Zero(3, 4);
  M(0, 0) = 1;
  M(1, 1) = 1;
  M(2, 2) = 1;
  M.col(3) = M.col(0);
  const SensingMatrix A(M);
  Vector r(3);
  r << 1, 0, 0;
  // g = (1, 0, 0, 1), so Omega = {0, 3}: two identical columns.
  const Direction d = compressed_newton_direction(A, r, {2, 1.0, 0.1});
  EXPECT_EQ(d.omega, SupportSet({0, 3}, 4));
  EXPECT_GT(d.ridge_applied, 0.0);
  EXPECT_TRUE(d.d.allFinite());
  EXPECT_LT(d.gradient_inner, 0.0);
}

TEST(Direction, RejectsBadParams) {
  const SensingMatrix A = gen_matrix(GenSpec{4, 6, 1, MatrixKind::Gaussian, 0.0, 5});
  EXPECT_THROW(compressed_newton_direction(A, Vector::Ones(4), {0, 1.0, 0.1}), std::invalid_argument);
  EXPECT_THROW(compressed_newton_direction(A, Vector::Ones(4), {2, 0.0, 0.1}), std::invalid_argument);
  EXPECT_THROW(compressed_newton_direction(A, Vector::Ones(4), {2, 1.0, -1.0}), std::invalid_argument);
  EXPECT_THROW(compressed_newton_direction(A, Vector::Ones(3), {2, 1.0, 0.1}), std::invalid_argument);
}
