#include <gtest/gtest.h>

#include "support.hpp"

using namespace umgad;

namespace {

// O(n^2) pair count; ties count half
double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        pairs += 1.0;
        wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
      }
  return wins / pairs;
}

}  // namespace

TEST(Auc, Examples) {
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1}), 0.75);
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{1, 2, 3, 4}, std::vector<int>{0, 0, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{4, 3, 2, 1}, std::vector<int>{0, 0, 1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{3, 1, 2, 2}, std::vector<int>{1, 0, 1, 0}), 0.875);
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.5, 0.5, 0.5, 0.9}, std::vector<int>{0, 1, 0, 1}), 0.75);
  EXPECT_DOUBLE_EQ(auc(std::vector<double>(6, 1.0), std::vector<int>{0, 1, 0, 1, 0, 0}), 0.5);
}

TEST(Auc, MatchesPairwiseOracle) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    RngStream rng(seed, "auc");
    const std::size_t n = 20 + rng.uniform_index(181);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.uniform_index(30)) / 7.0;  // frequent ties
      y[i] = rng.bernoulli(0.2) ? 1 : 0;
    }
    y[0] = 1;
    y[1] = 0;
    EXPECT_NEAR(auc(s, y), pairwise_auc(s, y), 1e-12) << "seed " << seed;
  }
}

TEST(Auc, Errors) {
  EXPECT_THROW(auc(std::vector<double>{1, 2}, std::vector<int>{1, 1}), SingleClass);
  EXPECT_THROW(auc(std::vector<double>{1, 2}, std::vector<int>{0, 0}), SingleClass);
  EXPECT_THROW(auc(std::vector<double>{1, 2, 3}, std::vector<int>{0, 1}), LengthMismatch);
}

TEST(Auc, ScaleInvariant) {
  const std::vector<double> s{0.3, 0.1, 0.7, 0.2, 0.9, 0.4};
  const std::vector<int> y{0, 0, 1, 0, 1, 1};
  std::vector<double> t(s);
  for (auto& v : t) v *= 123.0;
  EXPECT_EQ(auc(s, y), auc(t, y));
}

TEST(MacroF1, Examples) {
  // normal: tp=3 fp=1 fn=1 -> 0.75; anomalous: tp=1 fp=1 fn=1 -> 0.5
  const std::vector<int> labels{0, 0, 0, 0, 1, 1};
  const std::vector<int> pred{0, 0, 0, 1, 1, 0};
  EXPECT_DOUBLE_EQ(macro_f1(pred, labels), 0.625);
  EXPECT_DOUBLE_EQ(macro_f1(labels, labels), 1.0);
  // predicting all normal: normal F1 = 2*4/(8+2) = 0.8, anomalous 0
  EXPECT_DOUBLE_EQ(macro_f1(std::vector<int>(6, 0), labels), 0.4);
}

TEST(MacroF1, ElevenFifteenths) {
  EXPECT_NEAR(macro_f1(std::vector<int>{1, 0, 0, 0}, std::vector<int>{1, 1, 0, 0}), 11.0 / 15.0, 1e-15);
}

TEST(MacroF1, ThirdsExample) {
  const std::vector<int> labels{1, 1, 0, 0, 0};
  const std::vector<int> pred{1, 0, 1, 0, 0};
  // anomalous 2/4, normal 4/6
  EXPECT_NEAR(macro_f1(pred, labels), (0.5 + 2.0 / 3.0) / 2.0, 1e-15);
}

TEST(MacroF1, AbsentClassScoresOne) {
  const std::vector<int> zeros(4, 0);
  EXPECT_DOUBLE_EQ(macro_f1(zeros, zeros), 1.0);
  EXPECT_THROW(macro_f1(std::vector<int>{0, 1}, std::vector<int>{0}), LengthMismatch);
}

TEST(Evaluate, ReportsBothClasses) {
  const std::vector<double> s{0.9, 0.8, 0.1, 0.2};
  const std::vector<int> y{1, 0, 0, 1};
  const std::vector<int> p{1, 1, 0, 0};
  const auto m = evaluate(s, p, y);
  EXPECT_DOUBLE_EQ(m.auc, 0.75);
  EXPECT_DOUBLE_EQ(m.anomalous.precision, 0.5);
  EXPECT_DOUBLE_EQ(m.anomalous.recall, 0.5);
  EXPECT_DOUBLE_EQ(m.normal.f1, 0.5);
  EXPECT_DOUBLE_EQ(m.macro_f1, 0.5);
}
