#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "umgad/rng.hpp"

using umgad::RngStream;

TEST(Rng, SameSeedAndLabelRepeat) {
  RngStream a(7, "x"), b(7, "x");
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, LabelsSeparateStreams) {
  RngStream a(7, "mask/r=0/k=0"), b(7, "mask/r=0/k=1"), c(8, "mask/r=0/k=0");
  const auto x = a.next_u64();
  EXPECT_NE(x, b.next_u64());
  EXPECT_NE(x, c.next_u64());
}

TEST(Rng, UniformIndexInRangeAndCoversAll) {
  RngStream s(1, "idx");
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = s.uniform_index(7);
    ASSERT_LT(v, 7u);
    ++hits[v];
  }
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(Rng, UniformHalfOpen) {
  RngStream s(2, "u");
  for (int i = 0; i < 10000; ++i) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, NormalMoments) {
  RngStream s(3, "n");
  double sum = 0, sq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double v = s.normal();
    sum += v;
    sq += v * v;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.03);
  EXPECT_NEAR(sq / n, 1.0, 0.05);
}

TEST(Rng, SampleWithoutReplacementDistinct) {
  RngStream s(4, "swr");
  for (std::size_t count : {0u, 1u, 5u, 20u}) {
    const auto v = s.sample_without_replacement(20, count);
    ASSERT_EQ(v.size(), count);
    std::set<std::size_t> u(v.begin(), v.end());
    EXPECT_EQ(u.size(), count);
    for (auto x : v) EXPECT_LT(x, 20u);
  }
}

TEST(Rng, SampleCountClampedToPopulation) {
  RngStream s(5, "clamp");
  EXPECT_EQ(s.sample_without_replacement(3, 10).size(), 3u);
}
