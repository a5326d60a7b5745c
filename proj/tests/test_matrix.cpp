#include <gtest/gtest.h>

#include "support.hpp"

using namespace umgad;

namespace {

Matrix naive(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j)
      for (std::size_t k = 0; k < a.cols(); ++k) c(i, j) += a(i, k) * b(k, j);
  return c;
}

void expect_near(const Matrix& a, const Matrix& b, double tol = 1e-12) {
  ASSERT_TRUE(a.same_shape(b));
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.values()[i], b.values()[i], tol);
}

}  // namespace

TEST(Matrix, LiteralAndAccess) {
  Matrix m{{1, 2, 3}, {4, 5, 6}};
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_EQ(m(1, 2), 6.0);
  EXPECT_EQ(m.row(1)[0], 4.0);
  EXPECT_THROW((Matrix{{1, 2}, {3}}), ShapeMismatch);
}

TEST(Matrix, GemmVariantsMatchNaive) {
  const Matrix a = fx::random_matrix(5, 4, 1), b = fx::random_matrix(4, 3, 2);
  expect_near(multiply(a, b), naive(a, b));
  Matrix tn(4, 3);
  const Matrix a2 = fx::random_matrix(5, 4, 3), b2 = fx::random_matrix(5, 3, 4);
  gemm_tn_acc(a2, b2, tn);
  expect_near(tn, naive(transpose(a2), b2));
  Matrix nt(5, 5);
  gemm_nt_acc(a, a, nt);
  expect_near(nt, naive(a, transpose(a)));
}

TEST(Matrix, MultiplyShapeMismatch) {
  EXPECT_THROW(multiply(Matrix(2, 3), Matrix(2, 3)), ShapeMismatch);
}

TEST(Matrix, SparseProductsMatchDense) {
  const auto g = fx::small_graph(6, 1, 3, 9);
  const SparseMatrix a = normalize_adjacency(g.relations[0]);
  const Matrix h = fx::random_matrix(6, 3, 5);
  expect_near(spmm(a, h), naive(a.to_dense(), h));
  expect_near(spmm_t(a, h), naive(transpose(a.to_dense()), h));
}

TEST(Matrix, SigmoidStableAndExact) {
  EXPECT_NEAR(sigmoid(4.0), 0.98201379003790845, 1e-15);
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_GT(sigmoid(-800.0), -1e-300);
  EXPECT_EQ(sigmoid(800.0), 1.0);
}
