#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace umgad;

namespace {

ParamTensor random_param(const std::string& name, std::size_t r, std::size_t c, std::uint64_t seed) {
  return ParamTensor(name, fx::random_matrix(r, c, seed));
}

double check(const LossBuilder& f, std::vector<ParamTensor*> ps) { return finite_diff_check(f, ps); }

}  // namespace

TEST(Tape, SumGradientIsOnes) {
  ParamTensor w("w", Matrix{{1, 2}, {3, 4}});
  Tape t;
  Var loss = ad::sum(t.param(w));
  t.backward(loss);
  EXPECT_EQ(w.grad, Matrix(2, 2, 1.0));
}

TEST(Tape, ZeroScaledLossHasZeroGradient) {
  ParamTensor w("w", Matrix{{1, 2}, {3, 4}});
  Tape t;
  t.backward(ad::scale(ad::sum(t.param(w)), 0.0));
  EXPECT_EQ(w.grad, Matrix(2, 2, 0.0));
}

TEST(Tape, SecondBackwardThrows) {
  ParamTensor w("w", Matrix{{1}});
  Tape t;
  Var loss = ad::sum(t.param(w));
  t.backward(loss);
  EXPECT_THROW(t.backward(loss), GraphConsumed);
}

TEST(Tape, BackwardNeedsScalar) {
  ParamTensor w("w", Matrix{{1, 2}});
  Tape t;
  EXPECT_THROW(t.backward(t.param(w)), ShapeMismatch);
}

TEST(Tape, NonFiniteValueRejected) {
  Tape t;
  EXPECT_THROW(t.constant(Matrix{{std::nan("")}}), NumericalError);
}

TEST(Ops, MatmulExamples) {
  Tape t;
  const Matrix m = fx::random_matrix(3, 2, 1);
  EXPECT_EQ(ad::matmul(t.constant(Matrix::identity(3)), t.constant(m)).value(), m);
  EXPECT_EQ(ad::matmul(t.constant(Matrix{{1, 2}}), t.constant(Matrix{{3}, {4}})).value(), (Matrix{{11}}));
}

TEST(Ops, PropagateExamples) {
  Tape t;
  const Matrix h{{1}, {3}};
  auto ident = std::make_shared<const SparseMatrix>(SparseMatrix::identity(2));
  EXPECT_EQ(ad::propagate(ident, t.constant(h), 3).value(), h);
  const auto g = fx::make_graph(2, {{{0, 1}}}, Matrix(2, 1));
  auto a = std::make_shared<const SparseMatrix>(normalize_adjacency(g.relations[0]));
  EXPECT_EQ(ad::propagate(a, t.constant(h), 0).value(), h);
  const Matrix out = ad::propagate(a, t.constant(h), 1).value();
  EXPECT_NEAR(out(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(out(1, 0), 2.0, 1e-15);
}

TEST(Ops, SoftmaxClosedForm) {
  Tape t;
  const Matrix s = ad::softmax(t.constant(Matrix{{0.0, std::log(3.0)}})).value();
  EXPECT_NEAR(s(0, 0), 0.25, 1e-15);
  EXPECT_NEAR(s(0, 1), 0.75, 1e-15);
}

TEST(Ops, ScaledCosineExamples) {
  Tape t;
  const Matrix x{{1, 2, 0}};
  const std::vector<std::size_t> rows{0};
  EXPECT_NEAR(ad::scaled_cosine_loss(t.constant(x), x, rows, 2.0).scalar(), 0.0, 1e-15);
  EXPECT_NEAR(ad::scaled_cosine_loss(t.constant(Matrix{{0, 0, 5}}), x, rows, 1.0).scalar(), 1.0, 1e-15);
  EXPECT_NEAR(ad::scaled_cosine_loss(t.constant(Matrix{{-2, -4, 0}}), x, rows, 2.0).scalar(), 4.0, 1e-12);
  EXPECT_THROW(ad::scaled_cosine_loss(t.constant(Matrix{{0, 0, 0}}), x, rows, 2.0), DegenerateRow);
}

TEST(Ops, EdgeSoftmaxNllExamples) {
  const std::vector<double> one{0.3};
  EXPECT_EQ(edge_softmax_nll(one, std::vector<std::vector<double>>{{}}), 0.0);
  EXPECT_NEAR(edge_softmax_nll(one, std::vector<std::vector<double>>{{0.3}}), std::log(2.0), 1e-15);
  const std::vector<double> pos{1.0};
  EXPECT_NEAR(edge_softmax_nll(pos, std::vector<std::vector<double>>{{0.0, 0.0}}), -std::log(std::exp(1.0) / (std::exp(1.0) + 2.0)), 1e-15);
  EXPECT_NEAR(edge_softmax_nll(pos, std::vector<std::vector<double>>{{0.0, 0.0}}), 0.5514447139, 1e-9);
}

TEST(Ops, EdgeSoftmaxNllStableAtExtremes) {
  const std::vector<double> pos{50.0, -50.0};
  const std::vector<std::vector<double>> neg{{-50.0, -50.0}, {50.0, 50.0}};
  const double v = edge_softmax_nll(pos, neg);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v, 100.0 + std::log(2.0), 1e-9);
}

TEST(Ops, GroupedNllMatchesScalarForm) {
  Tape t;
  Matrix s{{1.0}, {0.0}, {0.0}, {2.0}, {-1.0}};
  const double got = ad::grouped_nll(t.constant(s), {{0, {0, 1, 2}}, {3, {3, 4}}}).scalar();
  const std::vector<double> pos{1.0, 2.0};
  const std::vector<std::vector<double>> neg{{0.0, 0.0}, {-1.0}};
  EXPECT_NEAR(got, edge_softmax_nll(pos, neg), 1e-14);
}

TEST(GradCheck, Quadratic) {
  ParamTensor w = random_param("w", 3, 2, 1);
  const double err = check([&](Tape& t) {
    Var v = t.param(w);
    return ad::scale(ad::sum(ad::pair_dots(v, v, {{0, 0}, {1, 1}, {2, 2}})), 0.5);
  }, {&w});
  EXPECT_LT(err, 1e-8);
}

TEST(GradCheck, ScaledCosineLoss) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ParamTensor w = random_param("w", 4, 3, seed);
    const Matrix x = fx::random_matrix(4, 3, 100 + seed);
    const std::vector<std::size_t> rows{0, 2, 3};
    EXPECT_LT(check([&](Tape& t) { return ad::scaled_cosine_loss(t.param(w), x, rows, 2.0); }, {&w}), 1e-4);
  }
}

TEST(GradCheck, MatmulPropagateChain) {
  const auto g = fx::small_graph(6, 1, 3, 4);
  auto a = std::make_shared<const SparseMatrix>(normalize_adjacency(g.relations[0]));
  ParamTensor w1 = random_param("w1", 3, 2, 5), w2 = random_param("w2", 2, 3, 6);
  const Matrix x = g.attributes;
  const std::vector<std::size_t> rows{0, 1, 2, 3, 4, 5};
  EXPECT_LT(check([&](Tape& t) {
    Var h = ad::propagate(a, ad::matmul(t.constant(x), t.param(w1)), 2);
    return ad::scaled_cosine_loss(ad::matmul(ad::propagate(a, h, 1), t.param(w2)), x, rows, 2.0);
  }, {&w1, &w2}), 1e-4);
}

TEST(GradCheck, SoftmaxWeightedSum) {
  ParamTensor logits = random_param("l", 1, 3, 7);
  ParamTensor m0 = random_param("m0", 2, 2, 8), m1 = random_param("m1", 2, 2, 9), m2 = random_param("m2", 2, 2, 10);
  const Matrix coef = fx::random_matrix(2, 2, 11);
  EXPECT_LT(check([&](Tape& t) {
    const std::array<Var, 3> terms{t.param(m0), t.param(m1), t.param(m2)};
    return ad::sum(ad::hadamard_const(ad::weighted_sum(terms, ad::softmax(t.param(logits))), coef));
  }, {&logits, &m0, &m1, &m2}), 1e-4);
}

TEST(GradCheck, NormalizePairDotsNll) {
  ParamTensor a = random_param("a", 4, 3, 12), b = random_param("b", 4, 3, 13);
  EXPECT_LT(check([&](Tape& t) {
    Var an = ad::normalize_rows(t.param(a));
    Var bn = ad::normalize_rows(t.param(b));
    const std::array<Var, 2> parts{ad::pair_dots(an, bn, {{0, 0}, {1, 1}, {2, 3}}), ad::pair_dots(an, an, {{0, 1}, {3, 2}})};
    return ad::grouped_nll(ad::vconcat(parts), {{0, {0, 3}}, {1, {1, 4, 2}}});
  }, {&a, &b}), 1e-4);
}

TEST(GradCheck, ReplaceRows) {
  ParamTensor tok = random_param("tok", 1, 3, 14), w = random_param("w", 3, 3, 15);
  const Matrix x = fx::random_matrix(5, 3, 16);
  const std::vector<std::size_t> masked{1, 4}, rows{0, 1, 4};
  EXPECT_LT(check([&](Tape& t) {
    Var in = ad::replace_rows(t.constant(x), masked, t.param(tok));
    return ad::scaled_cosine_loss(ad::matmul(in, t.param(w)), x, rows, 2.0);
  }, {&tok, &w}), 1e-4);
}

TEST(Adam, StepOneFromUnitGradient) {
  ParamTensor p("p", Matrix{{1.0}});
  p.grad = Matrix{{1.0}};
  AdamState st;
  std::array<ParamTensor*, 1> ps{&p};
  adam_step(ps, st, AdamConfig{0.1, 0.0}, 1);
  EXPECT_NEAR(p.value(0, 0), 0.9, 1e-6);
}

TEST(Adam, ZeroGradientNoDecayIsNoop) {
  ParamTensor p("p", Matrix{{1.5, -2.0}});
  p.zero_grad();
  AdamState st;
  std::array<ParamTensor*, 1> ps{&p};
  adam_step(ps, st, AdamConfig{0.1, 0.0}, 1);
  EXPECT_EQ(p.value, (Matrix{{1.5, -2.0}}));
}

TEST(Adam, DecoupledDecay) {
  ParamTensor p("p", Matrix{{2.0}});
  p.zero_grad();
  AdamState st;
  std::array<ParamTensor*, 1> ps{&p};
  adam_step(ps, st, AdamConfig{0.1, 0.01}, 1);
  EXPECT_NEAR(p.value(0, 0), 2.0 * (1.0 - 0.001), 1e-15);
}
