#include <random>

#include <gtest/gtest.h>

#include "deepridge/numeric.hpp"

using namespace deepridge;

TEST(Norms, L1) {
  EXPECT_EQ(l1_norm(Vector{0, 0, 0}), 0.0);
  EXPECT_EQ(l1_norm(Vector{3, -4}), 7.0);
  EXPECT_EQ(l1_norm(Vector{1}), 1.0);
}

TEST(Norms, L2) {
  EXPECT_EQ(l2_norm(Vector{3, 4}), 5.0);
  EXPECT_EQ(l2_norm(Vector{0, 0}), 0.0);
  EXPECT_EQ(l2_norm(Vector{1, 0, 0}), 1.0);
}

TEST(Norms, MixedL1L2Squared) {
  EXPECT_EQ(mixed_l1l2_squared(Matrix(2, 2)), 0.0);
  // columns (1,1) and (2,0)
  EXPECT_EQ(mixed_l1l2_squared(Matrix{{1, 2}, {1, 0}}), 8.0);
  EXPECT_EQ(mixed_l1l2_squared(Matrix{{3}}), 9.0);
}

TEST(Norms, MixedL1L1) {
  EXPECT_EQ(mixed_l1l1(Matrix(2, 2)), 0.0);
  EXPECT_EQ(mixed_l1l1(Matrix{{1, -2}, {3, 0}}), 6.0);
  EXPECT_EQ(mixed_l1l1(Matrix::identity(2)), 2.0);
}

TEST(Norms, FrobeniusSquared) {
  EXPECT_EQ(frobenius_norm_squared(Matrix(2, 3)), 0.0);
  EXPECT_EQ(frobenius_norm_squared(Matrix{{3, 4}}), 25.0);
  EXPECT_EQ(frobenius_norm_squared(Matrix::identity(3)), 3.0);
}

TEST(Norms, StandardInequalities) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 500; ++trial) {
    Vector v(1 + trial % 9);
    for (double& x : v) x = g(rng);
    const double l1 = l1_norm(v), l2 = l2_norm(v);
    EXPECT_LE(l2 * l2, l1 * l1 * (1 + 1e-15));
    EXPECT_LE(l1, static_cast<double>(v.size()) * max_abs(v) * (1 + 1e-15));
  }
}

TEST(Rank, Examples) {
  EXPECT_EQ(numerical_rank(Matrix(3, 3), 1e-8), 0u);
  EXPECT_EQ(numerical_rank(Matrix::identity(3), 1e-8), 3u);
  // outer product of (1,2) and (3,4)
  EXPECT_EQ(numerical_rank(Matrix{{3, 4}, {6, 8}}, 1e-8), 1u);
}

TEST(Rank, RejectsNonPositiveTolerance) {
  EXPECT_THROW(numerical_rank(Matrix::identity(2), 0.0), ValidationError);
}

TEST(Rank, SingularValuesOfKnownMatrix) {
  // diag(3, 2) rotated on the left: singular values stay {3, 2}.
  const double c = std::cos(0.3), s = std::sin(0.3);
  const Matrix q{{c, -s}, {s, c}};
  const Vector sv = singular_values(matmul(q, Matrix{{3, 0}, {0, 2}}));
  ASSERT_EQ(sv.size(), 2u);
  EXPECT_NEAR(sv[0], 3.0, 1e-13);
  EXPECT_NEAR(sv[1], 2.0, 1e-13);
}

TEST(Rank, ProductNeverExceedsFactors) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<std::size_t> dim(1, 7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = dim(rng), k = dim(rng), n = dim(rng), r = dim(rng);
    // A = (m×r)(r×k) has rank ≤ r.
    Matrix a1(m, r), a2(r, k), b(k, n);
    for (double& x : a1.data()) x = g(rng);
    for (double& x : a2.data()) x = g(rng);
    for (double& x : b.data()) x = g(rng);
    const Matrix a = matmul(a1, a2);
    const auto ra = numerical_rank(a), rb = numerical_rank(b);
    EXPECT_LE(ra, std::min({m, k, r}));
    EXPECT_LE(numerical_rank(matmul(a, b)), std::min(ra, rb));
  }
}

TEST(Products, Matvec) {
  EXPECT_EQ(matvec(Matrix::identity(3), Vector{1, 2, 3}), (Vector{1, 2, 3}));
  EXPECT_EQ(matvec(Matrix{{1, 2}, {3, 4}}, Vector{1, 1}), (Vector{3, 7}));
  EXPECT_EQ(matvec(Matrix(2, 2), Vector{5, -1}), (Vector{0, 0}));
  EXPECT_THROW(matvec(Matrix(2, 3), Vector{1, 1}), ValidationError);
}

TEST(Products, Matmul) {
  EXPECT_EQ(matmul(Matrix{{1, 1}}, Matrix{{1}, {1}}), (Matrix{{2}}));
  EXPECT_THROW(matmul(Matrix(2, 3), Matrix(2, 3)), ValidationError);
  const Matrix a{{1, 2, 3}, {4, 5, 6}};
  EXPECT_EQ(matmul(Matrix::identity(2), a), a);
  EXPECT_EQ(matvec_transposed(a, Vector{1, 1}), (Vector{5, 7, 9}));
}

TEST(MatrixType, RejectsBadData) {
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), ValidationError);
  const Matrix empty(0, 3);
  EXPECT_EQ(empty.cols(), 3u);
  EXPECT_EQ(matvec(empty, Vector{1, 2, 3}).size(), 0u);
}
